#include "cmchain/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "cmchain/lanczos.hpp"

namespace cmchain {

namespace {

MatVec dynamical_matvec(const QuadraticModel& model) {
    Eigen::ArrayXd inv_sqrt_m = model.masses.array().rsqrt();
    return [inv_sqrt_m, &model](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd y = (inv_sqrt_m * x.array()).matrix();
        y = model.stiffness * y;
        return (inv_sqrt_m * y.array()).matrix();
    };
}

/// Exponential fit of |c_r|, r = 1..rmax; nullopt when below noise or degenerate.
std::optional<double> correlation_length_fit(const Eigen::VectorXd& corr, int n) {
    if (n < 8) return std::nullopt;
    const int rmax = static_cast<int>(corr.size());
    if (rmax < 2) return std::nullopt;
    double sr = 0, sl = 0, srr = 0, srl = 0;
    for (int r = 1; r <= rmax; ++r) {
        const double mag = std::abs(corr[r - 1]);
        if (mag < 1e-14) return std::nullopt;
        const double lr = std::log(mag);
        sr += r; sl += lr; srr += double(r) * r; srl += r * lr;
    }
    const double denom = rmax * srr - sr * sr;
    if (denom <= 0) return std::nullopt;
    const double slope = (rmax * srl - sr * sl) / denom;
    if (slope >= 0) return std::nullopt;
    return -1.0 / slope;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void fill_moment_gaps(CMObservables& obs) {
    for (int order = 2; order <= 8; ++order)
        obs.moment_gaps[order] = gaussian_moment_gap(obs.mean_x, obs.var_x, order);
}

}  // namespace

NormalModes normal_modes(const QuadraticModel& model) {
    const int n = model.size();
    Eigen::VectorXd inv_sqrt_m = model.masses.array().rsqrt().matrix();
    Eigen::MatrixXd dyn =
        inv_sqrt_m.asDiagonal() * model.dense_stiffness() * inv_sqrt_m.asDiagonal();
    dyn = 0.5 * (dyn + dyn.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dyn);
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    if (es.eigenvalues()[0] <= 1e-12 * scale)
        throw SingularModelError(
            "normal_modes: dynamical matrix is not positive definite",
            model.trap.kind == TrapKind::None
                ? "uniform vector (rigid translation of the whole chain)"
                : "numerically degenerate mode");

    NormalModes modes;
    modes.frequencies = es.eigenvalues().cwiseSqrt();
    modes.mode_matrix = es.eigenvectors();
    // Deterministic sign convention: largest-magnitude component positive.
    for (int k = 0; k < n; ++k) {
        int imax = 0;
        modes.mode_matrix.col(k).cwiseAbs().maxCoeff(&imax);
        if (modes.mode_matrix(imax, k) < 0) modes.mode_matrix.col(k) = -modes.mode_matrix.col(k);
    }
    return modes;
}

GaussianState ground_state(const QuadraticModel& model) {
    const int n = model.size();
    NormalModes modes = normal_modes(model);
    Eigen::VectorXd inv_sqrt_m = model.masses.array().rsqrt().matrix();
    Eigen::VectorXd sqrt_m = model.masses.array().sqrt().matrix();

    Eigen::MatrixXd u_invw =
        modes.mode_matrix * modes.frequencies.cwiseInverse().asDiagonal() *
        modes.mode_matrix.transpose();
    Eigen::MatrixXd u_w = modes.mode_matrix * modes.frequencies.asDiagonal() *
                          modes.mode_matrix.transpose();

    GaussianState state;
    state.hbar = model.hbar;
    state.mean = Eigen::VectorXd::Zero(2 * n);
    state.mean.head(n) = model.centers;
    state.covariance = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    state.covariance.topLeftCorner(n, n) =
        0.5 * model.hbar * inv_sqrt_m.asDiagonal() * u_invw * inv_sqrt_m.asDiagonal();
    state.covariance.bottomRightCorner(n, n) =
        0.5 * model.hbar * sqrt_m.asDiagonal() * u_w * sqrt_m.asDiagonal();
    return state;
}

CMObservables cm_observables(const GaussianState& state, const QuadraticModel& model) {
    const int n = state.size();
    if (n != model.size())
        throw InvalidSpecError("cm_observables: state/model dimension mismatch");
    const Eigen::VectorXd& w = model.weights;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    CMObservables obs;
    obs.mean_x = w.dot(state.mean.head(n));
    obs.mean_p = state.mean.tail(n).sum();
    obs.var_x = w.dot(state.sigma_xx() * w);
    obs.var_p = (state.sigma_pp() * ones).sum();
    obs.uncertainty_product = obs.var_x * obs.var_p;
    obs.single_particle_var_max = state.sigma_xx().diagonal().maxCoeff();
    fill_moment_gaps(obs);

    const int i0 = n / 3;
    const int rmax = std::min(n / 3, 64);
    if (rmax >= 1 && i0 + rmax < n) {
        Eigen::VectorXd corr(rmax);
        for (int r = 1; r <= rmax; ++r) corr[r - 1] = state.covariance(i0, i0 + r);
        obs.correlation_length = correlation_length_fit(corr, n);
    }
    return obs;
}

double gaussian_moment_gap(double mean, double variance, int order) {
    if (order < 2 || order > 16)
        throw InvalidSpecError("gaussian_moment_gap: order must lie in [2, 16]");
    // <X^n> = sum_k C(n,k) (k-1)!! sigma^k mean^(n-k) over even k.
    double raw = 0.0;
    for (int k = 0; k <= order; k += 2) {
        double binom = 1.0;
        for (int j = 0; j < k; ++j) binom = binom * double(order - j) / double(j + 1);
        double dfact = 1.0;
        for (int j = k - 1; j > 1; j -= 2) dfact *= j;
        raw += binom * dfact * std::pow(variance, k / 2.0) *
               std::pow(mean, double(order - k));
    }
    return std::abs(raw - std::pow(mean, double(order)));
}

double central_moment_gap(const GaussianState& state, const QuadraticModel& model,
                          int order) {
    const int n = state.size();
    const double mean = model.weights.dot(state.mean.head(n));
    const double var = model.weights.dot(state.sigma_xx() * model.weights);
    return gaussian_moment_gap(mean, var, order);
}

std::complex<double> characteristic_fn(const GaussianState& state,
                                       const QuadraticModel& model, double alpha,
                                       double beta) {
    const int n = state.size();
    Eigen::VectorXd u(2 * n);
    u.head(n) = alpha * model.weights;
    u.tail(n).setConstant(beta);
    const double phase = u.dot(state.mean);
    const double quad = u.dot(state.covariance * u);
    return std::exp(std::complex<double>(-0.5 * quad, phase));
}

double gaussian_interval_mass(const Eigen::VectorXd& means,
                              const Eigen::VectorXd& variances,
                              const Eigen::VectorXd& weights, double a, double b) {
    if (!(a < b)) throw InvalidSpecError("gaussian_interval_mass: need a < b");
    double total = 0.0;
    for (int i = 0; i < means.size(); ++i) {
        double prob;
        if (variances[i] <= 0.0) {
            prob = (means[i] >= a && means[i] <= b) ? 1.0 : 0.0;
        } else {
            const double s = std::sqrt(variances[i]);
            const double hi = std::isinf(b) ? 1.0 : normal_cdf((b - means[i]) / s);
            const double lo = std::isinf(a) ? 0.0 : normal_cdf((a - means[i]) / s);
            prob = hi - lo;
        }
        total += weights[i] * prob;
    }
    return total;
}

double mass_fraction_in_interval(const GaussianState& state, const QuadraticModel& model,
                                 double a, double b) {
    return gaussian_interval_mass(state.mean_x(), state.sigma_xx().diagonal(),
                                  model.weights, a, b);
}

Eigen::VectorXd symplectic_eigenvalues(const GaussianState& state) {
    const int n = state.size();
    Eigen::MatrixXd j_form = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    j_form.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    j_form.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);

    Eigen::LLT<Eigen::MatrixXd> llt(state.covariance);
    if (llt.info() != Eigen::Success)
        throw InvalidSpecError("symplectic_eigenvalues: covariance not positive definite");
    Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd antisym = l.transpose() * j_form * l;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(antisym);
    Eigen::VectorXd sv = svd.singularValues();  // each d_k twice, descending
    Eigen::VectorXd out(n);
    for (int k = 0; k < n; ++k) out[k] = sv[2 * k];
    std::sort(out.data(), out.data() + n);
    return out;
}

double mean_energy(const QuadraticModel& model, const GaussianState& state) {
    const int n = model.size();
    const Eigen::VectorXd d = state.mean.head(n) - model.centers;
    const Eigen::VectorXd p = state.mean.tail(n);
    const Eigen::ArrayXd inv_m = model.masses.array().inverse();

    double energy = 0.5 * (p.array().square() * inv_m).sum() +
                    0.5 * d.dot(model.stiffness * d) +
                    0.5 * (state.sigma_pp().diagonal().array() * inv_m).sum();
    const Eigen::MatrixXd sxx = state.sigma_xx();
    for (int k = 0; k < model.stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(model.stiffness, k); it; ++it)
            energy += 0.5 * it.value() * sxx(it.col(), it.row());
    return energy;
}

GroundSummary ground_summary(const QuadraticModel& model,
                             const GroundSummaryOptions& opts) {
    const int n = model.size();
    const bool banded = model.interaction.kind != InteractionKind::AllToAll;

    if (n <= opts.dense_threshold || !banded) {
        GaussianState state = ground_state(model);
        GroundSummary summary;
        summary.cm = cm_observables(state, model);
        summary.site_variances = state.sigma_xx().diagonal();
        return summary;
    }

    // Lanczos route: quadratic forms of D^{+-1/2} plus probed diagonal.
    const double min_eig = lanczos_min_eigenvalue(dynamical_matvec(model), n);
    const double eig_scale = std::max(std::abs(min_eig), 1.0);
    if (min_eig <= 1e-12 * eig_scale)
        throw SingularModelError("ground_summary: dynamical matrix is not positive definite",
                                 model.trap.kind == TrapKind::None
                                     ? "uniform vector (rigid translation of the whole chain)"
                                     : "numerically degenerate mode");

    const MatVec matvec = dynamical_matvec(model);
    const auto inv_sqrt = [](double x) { return 1.0 / std::sqrt(x); };
    const auto sqrt_fn = [](double x) { return std::sqrt(x); };
    const double half_hbar = 0.5 * model.hbar;
    const Eigen::VectorXd sqrt_m = model.masses.array().sqrt().matrix();

    GroundSummary summary;
    CMObservables& obs = summary.cm;
    obs.mean_x = model.weights.dot(model.centers);
    obs.mean_p = 0.0;

    const Eigen::VectorXd u = sqrt_m / model.total_mass;  // M^{-1/2} w
    obs.var_x = half_hbar * lanczos_quadratic_form(matvec, u, inv_sqrt);
    obs.var_p = half_hbar * lanczos_quadratic_form(matvec, sqrt_m, sqrt_fn);
    obs.uncertainty_product = obs.var_x * obs.var_p;
    fill_moment_gaps(obs);

    // Diagonal of D^{-1/2} via distance-s probing; valid for banded chains
    // where entries decay exponentially away from the diagonal.
    const int stride = std::min(opts.probe_stride, n);
    Eigen::VectorXd diag_invsqrt(n);
    for (int c = 0; c < stride; ++c) {
        Eigen::VectorXd probe = Eigen::VectorXd::Zero(n);
        for (int i = c; i < n; i += stride) probe[i] = 1.0;
        Eigen::VectorXd col = lanczos_apply(matvec, probe, inv_sqrt);
        for (int i = c; i < n; i += stride) diag_invsqrt[i] = col[i];
    }
    summary.site_variances =
        (half_hbar * diag_invsqrt.array() / model.masses.array()).matrix();
    obs.single_particle_var_max = summary.site_variances.maxCoeff();

    const int i0 = n / 3;
    const int rmax = std::min(n / 3, 64);
    if (rmax >= 1 && i0 + rmax < n) {
        Eigen::VectorXd col =
            lanczos_apply(matvec, Eigen::VectorXd::Unit(n, i0), inv_sqrt);
        Eigen::VectorXd corr(rmax);
        for (int r = 1; r <= rmax; ++r)
            corr[r - 1] = half_hbar * col[i0 + r] / (sqrt_m[i0] * sqrt_m[i0 + r]);
        obs.correlation_length = correlation_length_fit(corr, n);
    }
    return summary;
}

}  // namespace cmchain
