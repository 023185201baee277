#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "relaxcouple/errors.hpp"

namespace relaxcouple {

/// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct ReportRow {
    double param = 0.0;
    std::string comp;
    double err = 0.0;
    std::optional<double> order;
};

/// Error table of a convergence sweep with observed orders and run metadata.
struct ExperimentReport {
    std::string name;
    std::vector<ReportRow> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void write_csv(std::ostream& os) const {
        for (const auto& [key, val] : metadata) os << "# " << key << "=" << val << "\n";
        os << "param,comp,err_l2,order\n";
        for (const auto& r : rows) {
            os << fmt_double(r.param) << "," << r.comp << "," << fmt_double(r.err) << ",";
            if (r.order) os << fmt_double(*r.order);
            os << "\n";
        }
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw io_error("cannot write " + path);
        write_csv(out);
    }
};

/// order_i = log(e_{i-1} / e_i) / log(ratio) for a sweep whose parameter
/// shrinks by `ratio` between consecutive rows.
inline std::vector<std::optional<double>> observed_orders(const std::vector<double>& errs,
                                                          double ratio) {
    std::vector<std::optional<double>> out(errs.size());
    for (std::size_t i = 1; i < errs.size(); ++i)
        if (errs[i - 1] > 0.0 && errs[i] > 0.0)
            out[i] = std::log(errs[i - 1] / errs[i]) / std::log(ratio);
    return out;
}

}  // namespace relaxcouple
