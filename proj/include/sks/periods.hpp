#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sks/maass.hpp"
#include "sks/quadforms.hpp"

namespace sks {

enum class PeriodMethod { closed_form, quadrature };
std::string to_string(PeriodMethod m);

struct PeriodResult {
    cplx value{0.0, 0.0};
    PeriodMethod method = PeriodMethod::closed_form;
    double error_estimate = 0.0;
    double scale = 0.0;  // same functional applied to |Phi|: the size against which cancellation is judged
    OrbitRep rep;
};

struct PeriodOptions {
    double rel_tol = 1e-12;  // relative to the integral of |Phi| along the cycle
    int max_panels = 1 << 14;
    double panel_width = 0.5;  // initial panel width in log y
    // The measure dmu_- = dy/(4|y|) on SO(1,1); -I identifies the two components of
    // H_-, so one stabilizer period of one component carries the full weight.
    double indefinite_scale = 0.25;
    PhiOptions phi;
};

// pi / eps(v) * Phi(z_v)
PeriodResult period_definite(const MaassForm& f, const OrbitRep& rep, const PhiOptions& opt = {});

// Direct SO(2) integral of phi(k_theta g_v^{-1}) d theta / 2, divided by eps(v).
PeriodResult period_definite_quadrature(const MaassForm& f, const OrbitRep& rep, const PhiOptions& opt = {});

// Cycle integral along g_v iy: one stabilizer period y in [eta^{-1/2}, eta^{1/2}] for a
// closed geodesic, y in (0, inf) truncated at the cusps for a split class. Gauss-Legendre
// panels in log y, doubled until two successive estimates agree.
PeriodResult period_indefinite(const MaassForm& f, const OrbitRep& rep, const PeriodOptions& opt = {});

// Same cycle integral over y in [y0, y0 * eta] (choice of base point on the geodesic).
PeriodResult period_indefinite_from(const MaassForm& f, const OrbitRep& rep, double log_y0,
                                    const PeriodOptions& opt = {});

PeriodResult period(const MaassForm& f, const OrbitRep& rep, const PeriodOptions& opt = {});

// Periods of many reps on a bounded pool; output order matches input order.
std::vector<PeriodResult> periods_parallel(const MaassForm& f, const std::vector<OrbitRep>& reps,
                                           const PeriodOptions& opt = {}, int threads = 0);

struct PeriodKey {
    std::string checksum;
    i64 N;
    Lattice lattice;
    i64 target;
    SymForm form;
    auto tie() const { return std::tie(checksum, N, lattice, target, form); }
    bool operator<(const PeriodKey& o) const { return tie() < o.tie(); }
};

// CSV cache (checksum, N, lattice, target, A, B, C) -> (value, error). Thread-safe.
class PeriodCache {
public:
    PeriodCache() = default;
    explicit PeriodCache(std::string path);

    std::optional<std::pair<cplx, double>> lookup(const PeriodKey& k) const;
    void insert(const PeriodKey& k, cplx value, double error);
    std::size_t size() const;
    // Drop entries whose checksum differs from keep; returns the number removed.
    std::size_t prune(const std::string& keep_checksum);
    // drops entries whose checksum is not in keep, returning their keys
    std::vector<PeriodKey> prune_except(const std::set<std::string>& keep);
    void save() const;  // no-op without a path
    const std::string& path() const { return path_; }

    static std::string header();

    // Lookup, or compute through period() and insert.
    PeriodResult get_or_compute(const MaassForm& f, const OrbitRep& rep, const PeriodOptions& opt = {});

private:
    std::string path_;
    mutable std::mutex m_;
    std::map<PeriodKey, std::pair<cplx, double>> entries_;
};

}  // namespace sks
