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
 * Synthetic BSM datasets and their CSV representation.
 *
 * File layout:
 *
 *     # seed=42
 *     m,T,r,sigma,c_hat
 *     0.93155697730739403,0.52913840790652477,...
 *
 * The comment line is optional on input. Every real is written with 17
 * significant digits so save/load is bit-exact.
 */

#pragma once

#include <charconv>
#include <filesystem>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "finqbit/bsm.hpp"
#include "finqbit/error.hpp"
#include "finqbit/random.hpp"

namespace finqbit {

struct Dataset {
    std::vector<MarketPoint> points;
    std::vector<double> labels; ///< normalized call prices, aligned with points
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] bool empty() const noexcept { return points.empty(); }

    friend bool operator==(const Dataset &, const Dataset &) = default;
};

/// Draws n points uniformly over the generator ranges and labels them with
/// bsm_price. Column i uses its own stream derive_seed(seed, {kDataset, i}).
[[nodiscard]] inline Dataset generate_dataset(std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw ValidationError("empty dataset: n must be at least 1");
    }
    Dataset d;
    d.seed = seed;
    d.points.resize(n);
    for (std::size_t col = 0; col < MarketPoint::kFeatures; ++col) {
        Rng rng(derive_seed(seed, {stream::kDataset, col}));
        const auto range = kGeneratorRanges[col];
        for (auto &p : d.points) {
            p[col] = rng.uniform(range.lo, range.hi);
        }
    }
    d.labels.reserve(n);
    for (const auto &p : d.points) {
        d.labels.push_back(bsm_price(p));
    }
    return d;
}

/// Splits off the trailing `fraction` of rows (at least one) as a second set.
[[nodiscard]] inline std::pair<Dataset, Dataset>
split_tail(const Dataset &d, double fraction) {
    if (d.size() < 2) {
        throw ValidationError("split_tail needs at least two rows");
    }
    auto tail = static_cast<std::size_t>(std::round(fraction * static_cast<double>(d.size())));
    tail = std::clamp<std::size_t>(tail, 1, d.size() - 1);
    const auto head = d.size() - tail;
    Dataset a, b;
    a.seed = b.seed = d.seed;
    a.points.assign(d.points.begin(), d.points.begin() + static_cast<std::ptrdiff_t>(head));
    a.labels.assign(d.labels.begin(), d.labels.begin() + static_cast<std::ptrdiff_t>(head));
    b.points.assign(d.points.begin() + static_cast<std::ptrdiff_t>(head), d.points.end());
    b.labels.assign(d.labels.begin() + static_cast<std::ptrdiff_t>(head), d.labels.end());
    return {std::move(a), std::move(b)};
}

namespace detail {

inline std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline double parse_real(const std::string &field, std::size_t line,
                         std::string_view column) {
    double v = 0.0;
    const auto *first = field.data();
    const auto *last = field.data() + field.size();
    if (!field.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw ParseError(line, "column '" + std::string(column) +
                                   "': cannot parse '" + field + "' as a number");
    }
    return v;
}

} // namespace detail

inline constexpr std::array<std::string_view, 5> kDatasetColumns{
    "m", "T", "r", "sigma", "c_hat"};

inline void write_dataset_csv(std::ostream &os, const Dataset &d) {
    os << "# seed=" << d.seed << '\n';
    os << "m,T,r,sigma,c_hat\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto &p = d.points[i];
        os << detail::format_real(p.m) << ',' << detail::format_real(p.T) << ','
           << detail::format_real(p.r) << ',' << detail::format_real(p.sigma)
           << ',' << detail::format_real(d.labels[i]) << '\n';
    }
}

/// Writes the CSV, creating missing parent directories.
inline void save_dataset(const Dataset &d, const std::string &path) {
    const std::filesystem::path fp(path);
    if (fp.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(fp.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_dataset_csv(out, d);
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

/// Parses the CSV format. Rows outside the generator ranges are accepted
/// (the pricing oracle's domain is wider) and reported through `warnings`.
inline Dataset read_dataset_csv(std::istream &in,
                                std::vector<std::string> *warnings = nullptr) {
    Dataset d;
    std::string line;
    std::size_t lineno = 0;
    std::array<std::size_t, 5> index{};
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty()) {
            continue;
        }
        if (text.front() == '#') {
            const auto pos = text.find("seed=");
            if (pos != std::string::npos) {
                const auto val = detail::trim(std::string_view(text).substr(pos + 5));
                std::uint64_t s = 0;
                auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), s);
                if (ec != std::errc() || ptr != val.data() + val.size()) {
                    throw ParseError(lineno, "invalid seed '" + val + "'");
                }
                d.seed = s;
            }
            continue;
        }
        auto fields = detail::split_csv(text);
        if (!have_header) {
            for (std::size_t c = 0; c < kDatasetColumns.size(); ++c) {
                auto it = std::find(fields.begin(), fields.end(), kDatasetColumns[c]);
                if (it == fields.end()) {
                    throw ParseError(lineno, "missing column '" +
                                                 std::string(kDatasetColumns[c]) + "'");
                }
                index[c] = static_cast<std::size_t>(it - fields.begin());
            }
            have_header = true;
            continue;
        }
        std::array<double, 5> v{};
        for (std::size_t c = 0; c < 5; ++c) {
            if (index[c] >= fields.size()) {
                throw ParseError(lineno, "missing value for column '" +
                                             std::string(kDatasetColumns[c]) + "'");
            }
            v[c] = detail::parse_real(fields[index[c]], lineno, kDatasetColumns[c]);
        }
        MarketPoint p{v[0], v[1], v[2], v[3]};
        try {
            validate_market_point(p);
        } catch (const DomainError &e) {
            throw ParseError(lineno, e.what());
        }
        if (warnings != nullptr) {
            for (std::size_t c = 0; c < 4; ++c) {
                if (!kGeneratorRanges[c].contains(p[c])) {
                    std::ostringstream os;
                    os << "line " << lineno << ": " << kDatasetColumns[c] << " = "
                       << v[c] << " outside generator range ["
                       << kGeneratorRanges[c].lo << ", " << kGeneratorRanges[c].hi
                       << "]";
                    warnings->push_back(os.str());
                }
            }
        }
        d.points.push_back(p);
        d.labels.push_back(v[4]);
    }
    if (!have_header) {
        throw ParseError(lineno == 0 ? 1 : lineno, "missing header 'm,T,r,sigma,c_hat'");
    }
    return d;
}

inline Dataset load_dataset(const std::string &path,
                            std::vector<std::string> *warnings = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open dataset '" + path + "'");
    }
    return read_dataset_csv(in, warnings);
}

} // namespace finqbit
