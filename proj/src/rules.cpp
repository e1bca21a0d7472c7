#include "tep/rules.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tep/errors.hpp"
#include "tep/frame.hpp"

namespace tep {

namespace {

int compare_names(const QuantRule& a, const QuantRule& b) {
    const std::size_t n = std::min(a.antecedent.size(), b.antecedent.size());
    for (std::size_t i = 0; i < n; ++i) {
        const int c = a.antecedent[i].feature.compare(b.antecedent[i].feature);
        if (c != 0) return c;
    }
    if (a.antecedent.size() != b.antecedent.size())
        return a.antecedent.size() < b.antecedent.size() ? -1 : 1;
    return 0;
}

int compare_doubles(double a, double b) {
    if (a < b) return -1;
    if (a > b) return 1;
    return 0;
}

std::string format_bound(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return format_double(v);
}

double parse_bound(const std::string& s) {
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}

}  // namespace

bool rule_less(const QuantRule& a, const QuantRule& b) {
    if (a.consequent != b.consequent) return a.consequent < b.consequent;
    if (const int c = compare_names(a, b); c != 0) return c < 0;
    for (std::size_t i = 0; i < a.antecedent.size(); ++i) {
        if (const int c = compare_doubles(a.antecedent[i].interval.lo, b.antecedent[i].interval.lo))
            return c < 0;
        if (const int c = compare_doubles(a.antecedent[i].interval.hi, b.antecedent[i].interval.hi))
            return c < 0;
    }
    if (const int c = compare_doubles(a.support, b.support)) return c < 0;
    return compare_doubles(a.confidence, b.confidence) < 0;
}

void normalize_rule(QuantRule& rule) {
    std::sort(rule.antecedent.begin(), rule.antecedent.end(),
              [](const RuleItem& x, const RuleItem& y) { return x.feature < y.feature; });
}

void write_rules_text(const RuleSet& rules, std::ostream& out) {
    out << "# cuts=" << rules.params.cuts_per_feature
        << " max_antecedents=" << rules.params.max_antecedents
        << " min_support=" << format_double(rules.params.min_support)
        << " min_confidence=" << format_double(rules.params.min_confidence) << '\n';
    for (const QuantRule& r : rules.rules) {
        out << "IF ";
        for (std::size_t i = 0; i < r.antecedent.size(); ++i) {
            if (i) out << " AND ";
            const RuleItem& item = r.antecedent[i];
            out << item.feature << " in [" << format_bound(item.interval.lo) << ','
                << format_bound(item.interval.hi) << ']';
        }
        out << " THEN fault=" << r.consequent << " support=" << format_double(r.support)
            << " confidence=" << format_double(r.confidence) << '\n';
    }
}

RuleSet read_rules_text(std::istream& in) {
    RuleSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream header(line.substr(1));
            std::string kv;
            while (header >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq);
                const std::string value = kv.substr(eq + 1);
                if (key == "cuts") set.params.cuts_per_feature = std::stoi(value);
                else if (key == "max_antecedents") set.params.max_antecedents = std::stoi(value);
                else if (key == "min_support") set.params.min_support = std::stod(value);
                else if (key == "min_confidence") set.params.min_confidence = std::stod(value);
            }
            continue;
        }
        std::stringstream ss(line);
        std::string word;
        ss >> word;
        if (word != "IF") throw MalformedFileError("rule line must start with IF: " + line);
        QuantRule rule;
        for (;;) {
            std::string feature, in_kw, bounds;
            if (!(ss >> feature >> in_kw >> bounds) || in_kw != "in")
                throw MalformedFileError("malformed rule item in: " + line);
            if (bounds.size() < 2 || bounds.front() != '[' || bounds.back() != ']')
                throw MalformedFileError("malformed interval in: " + line);
            const std::string inner = bounds.substr(1, bounds.size() - 2);
            const auto comma = inner.find(',');
            if (comma == std::string::npos)
                throw MalformedFileError("malformed interval in: " + line);
            RuleItem item;
            item.feature = feature;
            item.interval.lo = parse_bound(inner.substr(0, comma));
            item.interval.hi = parse_bound(inner.substr(comma + 1));
            rule.antecedent.push_back(std::move(item));
            std::string next;
            if (!(ss >> next)) throw MalformedFileError("truncated rule line: " + line);
            if (next == "AND") continue;
            if (next == "THEN") break;
            throw MalformedFileError("unexpected token '" + next + "' in: " + line);
        }
        std::string field;
        while (ss >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw MalformedFileError("malformed field '" + field + "' in: " + line);
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "fault") rule.consequent = std::stoi(value);
            else if (key == "support") rule.support = std::stod(value);
            else if (key == "confidence") rule.confidence = std::stod(value);
            else throw MalformedFileError("unknown field '" + key + "' in: " + line);
        }
        set.rules.push_back(std::move(rule));
    }
    return set;
}

std::string rules_to_json(const RuleSet& rules) {
    nlohmann::json doc;
    doc["params"] = {{"cuts_per_feature", rules.params.cuts_per_feature},
                     {"max_antecedents", rules.params.max_antecedents},
                     {"min_support", rules.params.min_support},
                     {"min_confidence", rules.params.min_confidence}};
    nlohmann::json arr = nlohmann::json::array();
    for (const QuantRule& r : rules.rules) {
        nlohmann::json items = nlohmann::json::array();
        for (const RuleItem& item : r.antecedent) {
            nlohmann::json j;
            j["feature"] = item.feature;
            if (std::isinf(item.interval.lo)) j["lo"] = nullptr;
            else j["lo"] = item.interval.lo;
            if (std::isinf(item.interval.hi)) j["hi"] = nullptr;
            else j["hi"] = item.interval.hi;
            items.push_back(std::move(j));
        }
        arr.push_back({{"antecedent", std::move(items)},
                       {"consequent", r.consequent},
                       {"support", r.support},
                       {"confidence", r.confidence}});
    }
    doc["rules"] = std::move(arr);
    return doc.dump(2) + "\n";
}

RuleSet rules_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    RuleSet set;
    if (doc.contains("params")) {
        const auto& p = doc.at("params");
        set.params.cuts_per_feature = p.value("cuts_per_feature", set.params.cuts_per_feature);
        set.params.max_antecedents = p.value("max_antecedents", set.params.max_antecedents);
        set.params.min_support = p.value("min_support", set.params.min_support);
        set.params.min_confidence = p.value("min_confidence", set.params.min_confidence);
    }
    for (const auto& jr : doc.at("rules")) {
        QuantRule rule;
        rule.consequent = jr.at("consequent").get<int>();
        rule.support = jr.at("support").get<double>();
        rule.confidence = jr.at("confidence").get<double>();
        for (const auto& ji : jr.at("antecedent")) {
            RuleItem item;
            item.feature = ji.at("feature").get<std::string>();
            if (!ji.at("lo").is_null()) item.interval.lo = ji.at("lo").get<double>();
            if (!ji.at("hi").is_null()) item.interval.hi = ji.at("hi").get<double>();
            rule.antecedent.push_back(std::move(item));
        }
        set.rules.push_back(std::move(rule));
    }
    return set;
}

}  // namespace tep
