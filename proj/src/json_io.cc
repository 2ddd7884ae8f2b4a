#include "fermirot/json_io.h"

#include <fstream>

namespace fermirot {

nlohmann::json operator_sum_to_json(const OperatorSum& x) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& [p, c] : x.terms()) {
        records.push_back({{"creators", p.creator_list()},
                           {"annihilators", p.annihilator_list()},
                           {"re", c.real()},
                           {"im", c.imag()}});
    }
    return records;
}

OperatorSum operator_sum_from_json(const nlohmann::json& j) {
    if (!j.is_array())
        throw Error("operator JSON must be a list of term records");
    std::vector<OperatorSum::term_t> terms;
    terms.reserve(j.size());
    for (const auto& rec : j) {
        std::uint64_t cre = 0, ann = 0;
        for (const auto& [field, mask] : {std::pair<const char*, std::uint64_t*>{"creators", &cre},
                                          {"annihilators", &ann}}) {
            if (!rec.contains(field) || !rec[field].is_array())
                throw Error(std::string("operator JSON record is missing '") + field + "'");
            for (const auto& v : rec[field]) {
                const auto p = v.get<std::uint64_t>();
                if (p >= max_orbitals)
                    throw Error("operator JSON index " + std::to_string(p) + " is out of range");
                if (*mask & (1ull << p))
                    throw Error("operator JSON record repeats index " + std::to_string(p));
                *mask |= 1ull << p;
            }
        }
        const double re = rec.value("re", 0.0);
        const double im = rec.value("im", 0.0);
        terms.push_back({OperatorProduct{cre, ann}, complex_t(re, im)});
    }
    return OperatorSum::from_terms(std::move(terms), 0.0);
}

nlohmann::json state_vector_to_json(const StateVector& v) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& [bits, amp] : v.amplitudes())
        records.push_back({{"bits", bits}, {"re", amp.real()}, {"im", amp.imag()}});
    return records;
}

StateVector state_vector_from_json(const nlohmann::json& j) {
    if (!j.is_array())
        throw Error("state JSON must be a list of amplitude records");
    StateVector v;
    for (const auto& rec : j) {
        if (!rec.contains("bits"))
            throw Error("state JSON record is missing 'bits'");
        v.add(Determinant{rec["bits"].get<std::uint64_t>()},
              complex_t(rec.value("re", 0.0), rec.value("im", 0.0)));
    }
    return v;
}

void save_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("cannot parse '" + path + "': " + e.what());
    }
}

} // namespace fermirot
