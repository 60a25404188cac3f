#include "vtm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vtm/errors.hpp"

namespace vtm::nn {

std::string GradCheckReport::to_text() const {
    std::string out;
    char buf[192];
    for (const GradCheckEntry& e : per_tensor) {
        std::snprintf(buf, sizeof(buf), "%-32s entries=%-6d max_rel_err=%.3e\n",
                      e.name.c_str(), e.checked, e.max_rel_error);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "total: entries=%d max_rel_err=%.3e\n",
                  checked, max_rel_error);
    out += buf;
    return out;
}

GradCheckReport gradcheck(const std::function<ad::Tensor()>& forward,
                          const NamedParams& params,
                          const GradCheckOptions& options) {
    for (const auto& [name, p] : params) {
        if (!p->requires_grad()) {
            throw ConfigError("gradcheck: parameter '" + name +
                              "' does not require gradients");
        }
        p->zero_grad();
    }
    ad::Tensor loss = forward();
    loss.backward();

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) {
        analytic.push_back(p->grad());
        if (analytic.back().size() != static_cast<size_t>(p->size())) {
            // Parameter not reached by the graph: gradient is identically zero.
            analytic.back().assign(static_cast<size_t>(p->size()), 0.0);
        }
    }

    GradCheckReport report;
    const double h = options.step;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        const auto& [name, p] = params[pi];
        const int n = p->size();
        std::vector<int> indices;
        if (options.max_entries_per_tensor <= 0 ||
            n <= options.max_entries_per_tensor) {
            indices.resize(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
                indices[static_cast<size_t>(i)] = i;
            }
        } else {
            // Deterministic sample without replacement, keyed by tensor name.
            Rng rng(seed_for(options.seed, name));
            std::vector<int> all(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
                all[static_cast<size_t>(i)] = i;
            }
            for (int i = 0; i < options.max_entries_per_tensor; ++i) {
                const int j =
                    i + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n - i));
                std::swap(all[static_cast<size_t>(i)], all[static_cast<size_t>(j)]);
            }
            indices.assign(all.begin(), all.begin() + options.max_entries_per_tensor);
            std::sort(indices.begin(), indices.end());
        }

        GradCheckEntry entry;
        entry.name = name;
        auto& w = p->values();
        for (int idx : indices) {
            const double original = w[static_cast<size_t>(idx)];
            w[static_cast<size_t>(idx)] = original + h;
            const double fp = forward().scalar();
            w[static_cast<size_t>(idx)] = original - h;
            const double fm = forward().scalar();
            w[static_cast<size_t>(idx)] = original;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][static_cast<size_t>(idx)];
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-2});
            entry.max_rel_error = std::max(entry.max_rel_error, rel);
            ++entry.checked;
        }
        report.checked += entry.checked;
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.per_tensor.push_back(std::move(entry));
    }
    return report;
}

} // namespace vtm::nn
