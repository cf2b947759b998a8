// Test-only generator of SYNTHETIC records in the HCV CSV layout.
//
// The values are drawn from made-up log-normal distributions chosen so the
// disease rows differ from donors mostly on AST, GGT, ALT, ALP and BIL. They
// exercise the schema, the missing-cell handling and the whole pipeline; they
// are not the laboratory data and carry no clinical meaning.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "hcvml/numeric.hpp"

namespace hcvml::fixtures {

struct SyntheticSpec {
    int donors = 533;
    int suspect = 7;
    int hepatitis = 24;
    int fibrosis = 21;
    int cirrhosis = 30;
    // Missing cells per lab column in ALB..PROT order.
    std::vector<int> missing = {1, 18, 1, 0, 0, 0, 10, 0, 0, 1};
    std::uint64_t seed = 1;
};

inline std::string synthetic_hcv_csv(const SyntheticSpec& spec = {}) {
    struct Profile {
        const char* category;
        int count;
        double shift;  // disease severity, 0 for donors
    };
    const std::vector<Profile> groups = {{"0=Blood Donor", spec.donors, 0.0},
                                         {"0s=suspect Blood Donor", spec.suspect, 0.6},
                                         {"1=Hepatitis", spec.hepatitis, 1.0},
                                         {"2=Fibrosis", spec.fibrosis, 1.2},
                                         {"3=Cirrhosis", spec.cirrhosis, 1.6}};
    // log-space means for donors and the per-unit-severity offsets
    const double base[10] = {std::log(42.0), std::log(68.0), std::log(23.0), std::log(26.0), std::log(8.0),
                             std::log(8.2),  std::log(5.4),  std::log(80.0), std::log(25.0), std::log(72.0)};
    const double sdev[10] = {0.12, 0.30, 0.45, 0.30, 0.50, 0.22, 0.20, 0.25, 0.60, 0.07};
    const double shift[10] = {-0.15, 0.35, 0.55, 1.30, 0.90, -0.35, -0.10, 0.25, 1.40, 0.02};

    RngStream rng(spec.seed, "synthetic-hcv");
    std::string out = "\"\",\"Category\",\"Age\",\"Sex\",\"ALB\",\"ALP\",\"ALT\",\"AST\",\"BIL\",\"CHE\",\"CHOL\",\"CREA\",\"GGT\",\"PROT\"\n";

    int total = 0;
    for (const auto& g : groups) total += g.count;
    // Missing cells are spread over evenly spaced rows per column.
    std::vector<std::vector<bool>> miss(static_cast<std::size_t>(total), std::vector<bool>(10, false));
    for (std::size_t k = 0; k < 10; ++k) {
        const int m = k < spec.missing.size() ? spec.missing[k] : 0;
        for (int r = 0; r < m; ++r) miss[static_cast<std::size_t>((r * 37 + static_cast<int>(k) * 11) % total)][k] = true;
    }

    int id = 0;
    char buf[64];
    for (const auto& g : groups) {
        for (int r = 0; r < g.count; ++r, ++id) {
            const int age = 23 + static_cast<int>(rng.below(55));
            const char* sex = rng.uniform() < 0.61 ? "m" : "f";
            out += "\"" + std::to_string(id + 1) + "\",\"" + g.category + "\"," + std::to_string(age) + ",\"" + sex + "\"";
            for (std::size_t k = 0; k < 10; ++k) {
                const double v = std::exp(base[k] + shift[k] * g.shift + sdev[k] * rng.normal());
                if (miss[static_cast<std::size_t>(id)][k]) {
                    out += ",NA";
                } else {
                    std::snprintf(buf, sizeof buf, ",%.1f", v);
                    out += buf;
                }
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace hcvml::fixtures
