#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mgtc/param_store.hpp"
#include "mgtc/rng.hpp"
#include "mgtc/tape.hpp"

namespace mgtc {

struct GradCheckRow {
    std::string name;
    double max_rel_err = 0.0;
    std::string status;  // "pass" | "fail" | "skipped"
};

struct GradCheckReport {
    std::vector<GradCheckRow> rows;
    double max_rel_err = 0.0;

    bool all_pass() const {
        for (const auto& r : rows)
            if (r.status == "fail") return false;
        return true;
    }

    std::string to_tsv() const {
        std::ostringstream os;
        os << "param_name\tmax_rel_err\tstatus\n";
        for (const auto& r : rows) {
            os << r.name << "\t";
            if (r.status == "skipped")
                os << "-";
            else
                os << r.max_rel_err;
            os << "\t" << r.status << "\n";
        }
        return os.str();
    }
};

// Central-difference check of the tape gradients. `build_loss` re-reads the
// store on every call, so perturbing a parameter value and rebuilding
// evaluates the perturbed loss. Frozen parameters are reported as skipped. A
// sampled subset of coordinates (at least `min_coords` where available) is
// probed per parameter.
template <typename T>
GradCheckReport finite_diff_check(ParamStoreT<T>& store,
                                  const std::function<typename TapeT<T>::Var(TapeT<T>&)>& build_loss,
                                  double eps, double tolerance, uint64_t sample_seed = 0,
                                  int min_coords = 32) {
    auto eval = [&]() -> double {
        TapeT<T> tape;
        return static_cast<double>(tape.scalar(build_loss(tape)));
    };

    const double f_a = eval();
    const double f_b = eval();
    if (f_a != f_b)
        throw ValidationError("gradcheck: loss function is non-deterministic (two evaluations differ)");

    store.zero_grads();
    {
        TapeT<T> tape;
        tape.backward(build_loss(tape));
    }
    std::vector<TensorT<T>> analytic;
    analytic.reserve(store.size());
    for (auto& p : store.params()) analytic.push_back(p.grad);

    Rng rng(sample_seed);
    GradCheckReport report;
    size_t pi = 0;
    for (auto& p : store.params()) {
        const TensorT<T>& ana = analytic[pi++];
        GradCheckRow row{p.name, 0.0, "pass"};
        if (!p.trainable) {
            row.status = "skipped";
            report.rows.push_back(row);
            continue;
        }
        const int64_t n = p.value.numel();
        std::vector<int64_t> coords;
        if (n <= min_coords) {
            coords.resize(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
        } else {
            for (int i = 0; i < min_coords; ++i) coords.push_back(static_cast<int64_t>(rng.below(static_cast<uint64_t>(n))));
        }
        for (int64_t c : coords) {
            const T saved = p.value.data[static_cast<size_t>(c)];
            p.value.data[static_cast<size_t>(c)] = saved + static_cast<T>(eps);
            const double f_plus = eval();
            p.value.data[static_cast<size_t>(c)] = saved - static_cast<T>(eps);
            const double f_minus = eval();
            p.value.data[static_cast<size_t>(c)] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double exact = static_cast<double>(ana.data[static_cast<size_t>(c)]);
            const double denom = std::max({std::fabs(numeric), std::fabs(exact), 1e-8});
            const double rel = std::fabs(numeric - exact) / denom;
            row.max_rel_err = std::max(row.max_rel_err, rel);
        }
        if (row.max_rel_err > tolerance) row.status = "fail";
        report.max_rel_err = std::max(report.max_rel_err, row.max_rel_err);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace mgtc
