#include "fermirot/fcidump.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fermirot {

namespace {

// triangular pair index for 0-based p >= q
std::uint32_t pair_index(int p, int q) {
    const int hi = std::max(p, q);
    const int lo = std::min(p, q);
    return static_cast<std::uint32_t>(hi * (hi + 1) / 2 + lo);
}

int parse_header_int(const std::string& header, const std::string& key, int line_no,
                     const std::string& name) {
    // find KEY ... = ... integer, case-insensitive
    auto upper = header;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    std::size_t pos = 0;
    while ((pos = upper.find(key, pos)) != std::string::npos) {
        // must not be part of a longer identifier
        if (pos > 0 && (std::isalnum(static_cast<unsigned char>(upper[pos - 1])) || upper[pos - 1] == '_')) {
            pos += key.size();
            continue;
        }
        std::size_t i = pos + key.size();
        while (i < upper.size() && std::isspace(static_cast<unsigned char>(upper[i])))
            ++i;
        if (i >= upper.size() || upper[i] != '=') {
            pos += key.size();
            continue;
        }
        ++i;
        while (i < upper.size() && std::isspace(static_cast<unsigned char>(upper[i])))
            ++i;
        std::size_t end = i;
        if (end < upper.size() && (upper[end] == '+' || upper[end] == '-'))
            ++end;
        while (end < upper.size() && std::isdigit(static_cast<unsigned char>(upper[end])))
            ++end;
        if (end == i)
            break;
        return std::stoi(header.substr(i, end - i));
    }
    throw Error(name + ":" + std::to_string(line_no) + ": missing " + key + " in FCIDUMP header");
}

double parse_value(std::string token, const std::string& name, int line_no) {
    for (char& c : token) {
        if (c == 'D' || c == 'd')
            c = 'E';
    }
    std::size_t consumed = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &consumed);
    } catch (const std::exception&) {
        throw Error(name + ":" + std::to_string(line_no) + ": cannot parse value '" + token + "'");
    }
    if (consumed != token.size())
        throw Error(name + ":" + std::to_string(line_no) + ": cannot parse value '" + token + "'");
    return v;
}

} // namespace

std::uint64_t MolecularIntegrals::canonical_key(int p, int q, int r, int s) {
    const std::uint32_t pq = pair_index(p, q);
    const std::uint32_t rs = pair_index(r, s);
    const std::uint32_t hi = std::max(pq, rs);
    const std::uint32_t lo = std::min(pq, rs);
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

double MolecularIntegrals::two_body(int p, int q, int r, int s) const {
    auto it = eri.find(canonical_key(p, q, r, s));
    return it == eri.end() ? 0.0 : it->second;
}

std::pair<MolecularIntegrals, OperatorSum> load_fcidump(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open FCIDUMP file '" + path + "'");
    return load_fcidump(in, path);
}

std::pair<MolecularIntegrals, OperatorSum> load_fcidump(std::istream& in, const std::string& name) {
    MolecularIntegrals ints;
    std::string line;
    int line_no = 0;

    // namelist header: first line starts with &FCI, runs until &END or /
    std::string header;
    bool header_done = false;
    while (!header_done && std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] != '&')
                throw Error(name + ":1: FCIDUMP header must start with &FCI");
        }
        header += ' ' + line;
        auto upper = line;
        std::transform(upper.begin(), upper.end(), upper.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        if (upper.find("&END") != std::string::npos || line.find('/') != std::string::npos)
            header_done = true;
    }
    if (!header_done)
        throw Error(name + ":" + std::to_string(line_no) + ": unterminated FCIDUMP header");

    ints.norb = parse_header_int(header, "NORB", line_no, name);
    ints.nelec = parse_header_int(header, "NELEC", line_no, name);
    ints.ms2 = parse_header_int(header, "MS2", line_no, name);
    if (ints.norb <= 0 || 2 * ints.norb > static_cast<int>(max_orbitals))
        throw Error(name + ": NORB = " + std::to_string(ints.norb) + " is out of range");
    ints.h.assign(static_cast<std::size_t>(ints.norb) * ints.norb, 0.0);

    std::vector<bool> h_seen(static_cast<std::size_t>(ints.norb) * ints.norb, false);
    bool scalar_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string token;
        if (!(ss >> token))
            continue; // blank line
        const double value = parse_value(token, name, line_no);
        int i = 0, j = 0, k = 0, l = 0;
        if (!(ss >> i >> j >> k >> l))
            throw Error(name + ":" + std::to_string(line_no) + ": expected 'value i j k l'");
        const auto in_range = [&](int x) { return x >= 0 && x <= ints.norb; };
        if (!in_range(i) || !in_range(j) || !in_range(k) || !in_range(l))
            throw Error(name + ":" + std::to_string(line_no) + ": orbital index out of range");
        if (i == 0 && j == 0 && k == 0 && l == 0) {
            if (scalar_seen && std::abs(ints.scalar_energy - value) > 1.0e-8)
                ints.warnings.push_back(name + ":" + std::to_string(line_no) +
                                        ": conflicting scalar energy entries");
            ints.scalar_energy = value;
            scalar_seen = true;
        } else if (k == 0 && l == 0) {
            if (i == 0 || j == 0)
                throw Error(name + ":" + std::to_string(line_no) + ": malformed one-electron entry");
            const int p = i - 1, q = j - 1;
            const std::size_t a = static_cast<std::size_t>(p) * ints.norb + q;
            const std::size_t b = static_cast<std::size_t>(q) * ints.norb + p;
            if ((h_seen[a] || h_seen[b]) && std::abs(ints.h[a] - value) > 1.0e-8)
                ints.warnings.push_back(name + ":" + std::to_string(line_no) +
                                        ": one-electron symmetry violation at (" + std::to_string(i) +
                                        "," + std::to_string(j) + ")");
            ints.h[a] = value;
            ints.h[b] = value;
            h_seen[a] = h_seen[b] = true;
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            const std::uint64_t key = MolecularIntegrals::canonical_key(i - 1, j - 1, k - 1, l - 1);
            auto it = ints.eri.find(key);
            if (it != ints.eri.end() && std::abs(it->second - value) > 1.0e-8)
                ints.warnings.push_back(name + ":" + std::to_string(line_no) +
                                        ": two-electron symmetry violation at (" + std::to_string(i) +
                                        " " + std::to_string(j) + "|" + std::to_string(k) + " " +
                                        std::to_string(l) + ")");
            ints.eri[key] = value;
        } else {
            throw Error(name + ":" + std::to_string(line_no) + ": malformed integral indices");
        }
    }

    OperatorSum hamiltonian = assemble_hamiltonian(ints);
    const double residual = hermiticity_residual(hamiltonian);
    if (residual > 1.0e-10)
        throw Error(name + ": assembled Hamiltonian is not Hermitian (residual " +
                    std::to_string(residual) + ")");
    return {std::move(ints), std::move(hamiltonian)};
}

OperatorSum assemble_hamiltonian(const MolecularIntegrals& ints) {
    TermAccumulator acc;
    if (ints.scalar_energy != 0.0)
        acc.add(OperatorProduct{}, ints.scalar_energy);
    const int n = ints.norb;
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            const double v = ints.one_body(p, q);
            if (v == 0.0)
                continue;
            for (int s = 0; s < 2; ++s) {
                const auto ps = static_cast<OrbitalIndex>(2 * p + s);
                const auto qs = static_cast<OrbitalIndex>(2 * q + s);
                acc.add(OperatorProduct{{ps}, {qs}}, v);
            }
        }
    }
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            for (int r = 0; r < n; ++r) {
                for (int s = 0; s < n; ++s) {
                    const double v = ints.two_body(p, q, r, s);
                    if (v == 0.0)
                        continue;
                    for (int sg = 0; sg < 2; ++sg) {
                        for (int tg = 0; tg < 2; ++tg) {
                            const RawOp raw[4] = {{static_cast<OrbitalIndex>(2 * p + sg), true},
                                                  {static_cast<OrbitalIndex>(2 * r + tg), true},
                                                  {static_cast<OrbitalIndex>(2 * s + tg), false},
                                                  {static_cast<OrbitalIndex>(2 * q + sg), false}};
                            const OperatorSum term = normal_order(std::span<const RawOp>(raw, 4),
                                                                  0.5 * v, 0.0);
                            acc.add_scaled(term, 1.0);
                        }
                    }
                }
            }
        }
    }
    return acc.build();
}

} // namespace fermirot
