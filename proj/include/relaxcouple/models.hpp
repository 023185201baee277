#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaxcouple/errors.hpp"
#include "relaxcouple/sysmodel.hpp"

namespace relaxcouple {

/// Linearized two-speed kinetic model in (rho, q) variables:
/// A = [[0,-v],[-v,0]], S = (-2 rho*).
inline RelaxationSystem carleman(double v, double rho_star, double eps_right = 1e-3) {
    if (!(v > 0.0) || !(rho_star > 0.0))
        throw validation_error("carleman: v and rho_star must be positive");
    const Mat a(2, 2, {0.0, -v, -v, 0.0});
    const Mat s(1, 1, {-2.0 * rho_star});
    return build_system(2, 1, a, s, eps_right);
}

/// Names of the state components for reporting.
inline std::vector<std::string> carleman_names() { return {"rho", "q"}; }

/// Scaling between physical moments (rho, w, theta, f_3..f_M) and the
/// symmetrized state (rho, w, theta/sqrt(2), sqrt(k!) f_k).
struct MomentConvention {
    int M;

    explicit MomentConvention(int M_) : M(M_) {
        if (M < 3 || M % 2 == 0)
            throw validation_error("MomentConvention: M must be odd and at least 3");
    }

    int n() const { return M + 1; }

    std::vector<double> scale_factors() const {
        std::vector<double> s(n(), 1.0);
        s[2] = 1.0 / std::sqrt(2.0);
        double fact = 2.0;
        for (int k = 3; k <= M; ++k) {
            fact *= k;
            s[k] = std::sqrt(fact);
        }
        return s;
    }

    std::vector<double> to_state(const std::vector<double>& phys) const {
        const auto s = scale_factors();
        std::vector<double> out(phys);
        for (int i = 0; i < n(); ++i) out[i] *= s[i];
        return out;
    }

    std::vector<double> to_physical(const std::vector<double>& state) const {
        const auto s = scale_factors();
        std::vector<double> out(state);
        for (int i = 0; i < n(); ++i) out[i] /= s[i];
        return out;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> v{"rho", "w", "theta"};
        for (int k = 3; k <= M; ++k) v.push_back("f" + std::to_string(k));
        return v;
    }
};

/// Linearized one-dimensional moment closure chain of odd order M:
/// A tridiagonal with off-diagonal sqrt(1)..sqrt(M), S = -I. Even M gives a
/// singular A and is rejected. The default cap keeps the eigenvalue spread
/// in a well-tested range; raise it deliberately if needed.
inline RelaxationSystem grad_moment(int M, double eps_right = 1e-3, int max_M = 15) {
    if (M < 3) throw validation_error("grad_moment: M must be at least 3");
    if (M % 2 == 0)
        throw validation_error("grad_moment: A singular for even M; M must be odd");
    if (M > max_M)
        throw validation_error("grad_moment: M exceeds the configured cap of " +
                               std::to_string(max_M));
    const int n = M + 1;
    const int m = M - 2;
    Mat a(n, n);
    for (int k = 1; k <= M; ++k) {
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
        a(k, k - 1) = a(k - 1, k);
    }
    Mat s = -1.0 * Mat::identity(m);
    return build_system(n, m, a, s, eps_right);
}

inline std::vector<std::string> component_names(const RelaxationSystem& sys) {
    if (sys.n == 2 && sys.m == 1) return carleman_names();
    if (sys.n >= 4 && sys.m == sys.n - 3 && sys.n % 2 == 0)
        return MomentConvention(sys.n - 1).names();
    std::vector<std::string> v;
    for (int i = 1; i <= sys.n; ++i) v.push_back("u" + std::to_string(i));
    return v;
}

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

/// Reads a system from a JSON file with keys n, m, A (row-major n*n), S
/// (row-major m*m) and eps_right, then validates it.
inline RelaxationSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_system: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::ostringstream os;
        os << "load_system: parse error in " << path << " at line "
           << detail::line_of_offset(text, e.byte) << ": " << e.what();
        throw validation_error(os.str());
    }

    auto require = [&](const char* key) {
        if (!j.contains(key))
            throw validation_error(std::string("load_system: missing key '") + key + "'");
    };
    require("n");
    require("m");
    require("A");
    require("S");
    require("eps_right");

    int n = 0, m = 0;
    double eps = 0.0;
    std::vector<double> a_entries, s_entries;
    try {
        n = j.at("n").get<int>();
        m = j.at("m").get<int>();
        eps = j.at("eps_right").get<double>();
        a_entries = j.at("A").get<std::vector<double>>();
        s_entries = j.at("S").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("load_system: bad value type: ") + e.what());
    }
    if (n <= 0 || m <= 0)
        throw validation_error("load_system: keys 'n' and 'm' must be positive");
    if (a_entries.size() != static_cast<std::size_t>(n) * n)
        throw validation_error("load_system: key 'A' must hold n*n entries");
    if (s_entries.size() != static_cast<std::size_t>(m) * m)
        throw validation_error("load_system: key 'S' must hold m*m entries");

    return build_system(n, m, Mat(n, n, std::move(a_entries)),
                        Mat(m, m, std::move(s_entries)), eps);
}

inline void save_system(const std::string& path, const RelaxationSystem& sys) {
    nlohmann::json j;
    j["n"] = sys.n;
    j["m"] = sys.m;
    j["A"] = sys.A.data();
    j["S"] = sys.S.data();
    j["eps_right"] = sys.eps_right;
    std::ofstream out(path);
    if (!out) throw io_error("save_system: cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace relaxcouple
