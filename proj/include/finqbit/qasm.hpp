// Copyright 2026 The finqbit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Minimal OpenQASM 3 text export/import for CircuitDescription.
 *
 * Grammar (one statement per line, blank lines and `//` comments ignored):
 *
 *     program   := header* statement*
 *     header    := "OPENQASM 3.0;" | "include \"stdgates.inc\";"
 *                | "qubit[" N "] q;"
 *     statement := rot "(" real ")" " q[" k "];"
 *                | "u3(" real ", " real ", " real ") q[" k "];"
 *                | "cx q[" c "], q[" t "];"
 *     rot       := "rx" | "ry" | "rz"
 *
 * Reals are written with 17 significant digits, so export then import
 * reproduces every angle exactly. u3 here carries this project's U3
 * convention, which matches stdgates u3 up to global phase.
 */

#pragma once

#include <regex>
#include <sstream>
#include <string>

#include "finqbit/dataset.hpp"
#include "finqbit/error.hpp"
#include "finqbit/quantum.hpp"

namespace finqbit {

[[nodiscard]] inline std::string to_qasm(const CircuitDescription &c) {
    c.validate();
    std::ostringstream os;
    os << "OPENQASM 3.0;\n";
    os << "include \"stdgates.inc\";\n";
    os << "qubit[" << c.n_qubits << "] q;\n";
    for (const auto &g : c.gates) {
        switch (g.kind) {
        case GateKind::CNOT:
            os << "cx q[" << g.targets[0] << "], q[" << g.targets[1] << "];\n";
            break;
        case GateKind::U3:
            os << "u3(" << detail::format_real(g.angles[0]) << ", "
               << detail::format_real(g.angles[1]) << ", "
               << detail::format_real(g.angles[2]) << ") q[" << g.targets[0] << "];\n";
            break;
        default:
            os << gate_name(g.kind) << '(' << detail::format_real(g.angles[0])
               << ") q[" << g.targets[0] << "];\n";
            break;
        }
    }
    return os.str();
}

[[nodiscard]] inline CircuitDescription from_qasm(const std::string &text) {
    static const std::regex kQubits(R"(^qubit\[(\d+)\]\s+q;$)");
    static const std::regex kCx(R"(^cx\s+q\[(\d+)\],\s*q\[(\d+)\];$)");
    static const std::regex kRot(R"(^(rx|ry|rz)\(([^)]+)\)\s+q\[(\d+)\];$)");
    static const std::regex kU3(R"(^u3\(([^,]+),([^,]+),([^)]+)\)\s+q\[(\d+)\];$)");

    CircuitDescription c;
    c.n_qubits = 0;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    std::smatch m;
    auto real = [&](const std::string &s) {
        return detail::parse_real(detail::trim(s), lineno, "angle");
    };
    while (std::getline(in, raw)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (const auto pos = line.find("//"); pos != std::string::npos) {
            line = detail::trim(std::string_view(line).substr(0, pos));
        }
        if (line.empty() || line.rfind("OPENQASM", 0) == 0 || line.rfind("include", 0) == 0) {
            continue;
        }
        if (std::regex_match(line, m, kQubits)) {
            c.n_qubits = std::stoi(m[1]);
            continue;
        }
        if (c.n_qubits == 0) {
            throw ParseError(lineno, "gate before qubit declaration");
        }
        if (std::regex_match(line, m, kCx)) {
            c.gates.push_back(GateSpec::cnot(std::stoi(m[1]), std::stoi(m[2])));
        } else if (std::regex_match(line, m, kU3)) {
            c.gates.push_back(
                GateSpec::u3(std::stoi(m[4]), real(m[1]), real(m[2]), real(m[3])));
        } else if (std::regex_match(line, m, kRot)) {
            const double a = real(m[2]);
            const int q = std::stoi(m[3]);
            const auto name = m[1].str();
            c.gates.push_back(name == "rx"   ? GateSpec::rx(q, a)
                              : name == "ry" ? GateSpec::ry(q, a)
                                             : GateSpec::rz(q, a));
        } else {
            throw ParseError(lineno, "unrecognized statement '" + line + "'");
        }
        try {
            c.gates.back().validate(c.n_qubits);
        } catch (const ValidationError &e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (c.n_qubits == 0) {
        throw ParseError(lineno, "missing qubit declaration");
    }
    return c;
}

} // namespace finqbit
