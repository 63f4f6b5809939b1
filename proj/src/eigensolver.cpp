#include "spectrolab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/SparseCholesky>

#include "spectrolab/error.hpp"

namespace spectrolab {

namespace {

template <class Scalar>
Scalar random_entry(std::mt19937_64& rng, std::normal_distribution<double>& normal) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return normal(rng);
  } else {
    const double re = normal(rng);
    const double im = normal(rng);
    return Scalar(re, im);
  }
}

// A - sigma I = P^T L D L^H P. The block solve walks L once for all
// right-hand sides, which Eigen's column-by-column solve does not.
template <class Scalar>
class ShiftedFactor {
 public:
  using ColSparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ShiftedFactor(const ColSparse& a) : a_(a), identity_(a.rows(), a.cols()) {
    identity_.setIdentity();
    ldlt_.analyzePattern(a_);
  }

  // False when the factorization breaks down (a pivot at roundoff level).
  bool factor(double sigma, double scale) {
    sigma_ = sigma;
    const ColSparse shifted = a_ - Scalar(sigma) * identity_;
    ldlt_.factorize(shifted);
    if (ldlt_.info() != Eigen::Success) return false;
    const auto& d = ldlt_.vectorD();
    negatives_ = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double v = std::real(d(i));
      if (!(std::abs(v) > 1e-13 * scale)) return false;
      if (v < 0.0) ++negatives_;
    }
    return true;
  }

  double shift() const { return sigma_; }
  // Eigenvalues strictly below the shift (Sylvester inertia).
  Eigen::Index negatives() const { return negatives_; }

  Mat solve(const Mat& b) const {
    const Eigen::Index n = b.rows();
    const Eigen::Index p = b.cols();
    const auto& lmat = ldlt_.matrixL().nestedExpression();
    const auto* outer = lmat.outerIndexPtr();
    const auto* inner = lmat.innerIndexPtr();
    const Scalar* val = lmat.valuePtr();
    const auto& perm = ldlt_.permutationP().indices();
    const auto& d = ldlt_.vectorD();

    std::vector<Scalar> y(static_cast<std::size_t>(n * p));
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar* row = &y[static_cast<std::size_t>(perm(i) * p)];
      for (Eigen::Index c = 0; c < p; ++c) row[c] = b(i, c);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar* yj = &y[static_cast<std::size_t>(j * p)];
      for (auto idx = outer[j]; idx < outer[j + 1]; ++idx) {
        Scalar* yi = &y[static_cast<std::size_t>(inner[idx] * p)];
        const Scalar l = val[idx];
        for (Eigen::Index c = 0; c < p; ++c) yi[c] -= l * yj[c];
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double inv = 1.0 / std::real(d(j));
      Scalar* yj = &y[static_cast<std::size_t>(j * p)];
      for (Eigen::Index c = 0; c < p; ++c) yj[c] *= inv;
    }
    std::vector<Scalar> acc(static_cast<std::size_t>(p));
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      Scalar* yj = &y[static_cast<std::size_t>(j * p)];
      for (Eigen::Index c = 0; c < p; ++c) acc[c] = yj[c];
      for (auto idx = outer[j]; idx < outer[j + 1]; ++idx) {
        const Scalar* yi = &y[static_cast<std::size_t>(inner[idx] * p)];
        const Scalar l = Eigen::numext::conj(val[idx]);
        for (Eigen::Index c = 0; c < p; ++c) acc[c] -= l * yi[c];
      }
      for (Eigen::Index c = 0; c < p; ++c) yj[c] = acc[c];
    }
    Mat x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar* row = &y[static_cast<std::size_t>(perm(i) * p)];
      for (Eigen::Index c = 0; c < p; ++c) x(i, c) = row[c];
    }
    return x;
  }

 private:
  const ColSparse& a_;
  ColSparse identity_;
  Eigen::SimplicialLDLT<ColSparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  double sigma_ = 0.0;
  Eigen::Index negatives_ = 0;
};

Eigen::Index effective_limit(int k, const SolverOptions& options, Eigen::Index n) {
  if (options.cover_multiple <= 0.0) return std::min<Eigen::Index>(k, n);
  if (options.k_limit <= 0) return n;
  return std::min<Eigen::Index>(std::max(k, options.k_limit), n);
}

// How many of the ascending `values` to return: k, extended until the
// cover target is reached or the limit hit.
std::size_t covered_count(const std::vector<double>& values, int k, const SolverOptions& options, Eigen::Index n) {
  std::size_t take = std::min<std::size_t>(values.size(), static_cast<std::size_t>(k));
  if (options.cover_multiple > 0.0 && !values.empty()) {
    const double target = options.cover_multiple * values.front();
    const auto limit = std::min(values.size(), static_cast<std::size_t>(effective_limit(k, options, n)));
    while (take < limit && values[take - 1] < target) ++take;
  }
  return take;
}

// Block Lanczos on (A - sigma I)^{-1} with full reorthogonalisation and
// deflation of already accepted vectors. Eigenvalues just above sigma
// converge first.
template <class Scalar>
class ShiftInvertLanczos {
 public:
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Candidate {
    double value = 0.0;
    double residual = 0.0;  // explicit ||A x - value x|| for unit x; < 0 if not computed
    double estimate = 0.0;  // first-order eigenvalue error from the Lanczos residual
    Eigen::Index column = 0;
  };

  ShiftInvertLanczos(const Sparse& a, const ShiftedFactor<Scalar>& factor, const Mat& deflate, int block,
                     std::mt19937_64& rng)
      : a_(a), factor_(factor), z_(deflate), p_(block), rng_(rng) {
    const Eigen::Index n = a.rows();
    q_.resize(n, 4 * p_);
    Mat v(n, p_);
    fill_random(v);
    Mat unused;
    orthonormalize_block(v, 0, unused);
    q_.leftCols(p_) = v;
    m_ = p_;
  }

  Eigen::Index basis_size() const { return m_; }
  bool exhausted() const { return exhausted_; }

  void step() {
    const Eigen::Index n = a_.rows();
    const Eigen::Index cur = m_ - p_;
    Mat w = factor_.solve(q_.middleCols(cur, p_));
    Mat alpha = q_.middleCols(cur, p_).adjoint() * w;
    alpha = (0.5 * (alpha + alpha.adjoint())).eval();
    w -= q_.middleCols(cur, p_) * alpha;
    if (cur > 0) w -= q_.middleCols(cur - p_, p_) * beta_.back().adjoint();
    // Second pass only when the first one cancelled heavily (DGKS).
    for (int pass = 0; pass < 2; ++pass) {
      const double before = w.norm();
      w -= q_.leftCols(m_) * (q_.leftCols(m_).adjoint() * w);
      if (z_.cols() > 0) w -= z_ * (z_.adjoint() * w);
      if (w.norm() > 0.7 * before) break;
    }
    Mat beta;
    orthonormalize_block(w, m_, beta);
    alpha_.push_back(alpha);
    beta_.push_back(beta);
    if (m_ + p_ > n - z_.cols()) {
      exhausted_ = true;
      return;
    }
    if (q_.cols() < m_ + p_) {
      Mat grown(n, 2 * q_.cols());
      grown.leftCols(m_) = q_.leftCols(m_);
      q_ = std::move(grown);
    }
    q_.middleCols(m_, p_) = w;
    m_ += p_;
  }

  // Ritz pairs above sigma in ascending order, with error estimates.
  std::vector<Candidate> ritz(double sigma) {
    const Eigen::Index blocks = static_cast<Eigen::Index>(alpha_.size());
    const Eigen::Index dim = blocks * p_;
    Mat h = Mat::Zero(dim, dim);
    for (Eigen::Index b = 0; b < blocks; ++b) {
      h.block(b * p_, b * p_, p_, p_) = alpha_[static_cast<std::size_t>(b)];
      if (b + 1 < blocks) {
        h.block((b + 1) * p_, b * p_, p_, p_) = beta_[static_cast<std::size_t>(b)];
        h.block(b * p_, (b + 1) * p_, p_, p_) = beta_[static_cast<std::size_t>(b)].adjoint();
      }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    ritz_vectors_ = es.eigenvectors();
    const Mat tail = beta_.back() * es.eigenvectors().bottomRows(p_);
    std::vector<Candidate> out;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double theta = es.eigenvalues()(j);
      if (!(theta > 0.0)) continue;
      Candidate c;
      c.value = sigma + 1.0 / theta;
      c.estimate = tail.col(j).norm() / (theta * theta);
      c.residual = -1.0;
      c.column = j;
      out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) { return x.value < y.value; });
    return out;
  }

  // Unit Ritz vectors for the first `count` candidates of the last ritz() call.
  Mat vectors(const std::vector<Candidate>& cand, std::size_t count) const {
    const Eigen::Index dim = static_cast<Eigen::Index>(alpha_.size()) * p_;
    Mat s(dim, static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) s.col(static_cast<Eigen::Index>(j)) = ritz_vectors_.col(cand[j].column);
    Mat x = q_.leftCols(dim) * s;
    x.colwise().normalize();
    return x;
  }


 private:
  void fill_random(Mat& x) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = random_entry<Scalar>(rng_, normal);
    }
    if (z_.cols() > 0) {
      x -= z_ * (z_.adjoint() * x);
      x -= z_ * (z_.adjoint() * x);
    }
  }

  // Modified Gram-Schmidt inside the block; a column that collapses is
  // replaced by a fresh random direction and gets a zero in beta.
  void orthonormalize_block(Mat& w, Eigen::Index used, Mat& beta) {
    const Eigen::Index p = w.cols();
    beta = Mat::Zero(p, p);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < p; ++c) {
      const double before = w.col(c).norm();
      for (Eigen::Index e = 0; e < c; ++e) {
        const Scalar r = w.col(e).dot(w.col(c));
        w.col(c) -= r * w.col(e);
        beta(e, c) += r;
      }
      double nrm = w.col(c).norm();
      if (nrm > 1e-10 * before && nrm > 0.0) {
        beta(c, c) = nrm;
        w.col(c) /= nrm;
        continue;
      }
      // Rank loss: restart this column from noise, keep beta's column as is.
      for (int attempt = 0; attempt < 3; ++attempt) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, c) = random_entry<Scalar>(rng_, normal);
        for (int pass = 0; pass < 2; ++pass) {
          if (used > 0) w.col(c) -= q_.leftCols(used) * (q_.leftCols(used).adjoint() * w.col(c));
          if (z_.cols() > 0) w.col(c) -= z_ * (z_.adjoint() * w.col(c));
          for (Eigen::Index e = 0; e < c; ++e) w.col(c) -= w.col(e).dot(w.col(c)) * w.col(e);
        }
        nrm = w.col(c).norm();
        if (nrm > 1e-8) break;
      }
      w.col(c) /= nrm;
      if (c < beta.rows()) beta(c, c) = 0.0;
    }
  }

  const Sparse& a_;
  const ShiftedFactor<Scalar>& factor_;
  const Mat& z_;
  Eigen::Index p_;
  std::mt19937_64& rng_;
  Mat q_;
  Eigen::Index m_ = 0;
  std::vector<Mat> alpha_;
  std::vector<Mat> beta_;
  Mat ritz_vectors_;
  bool exhausted_ = false;
};

// Lowest k eigenpairs by slicing the spectrum from zero upwards. Every
// slice [sigma, hi) is certified by the inertia of A - hi I: the number of
// accepted eigenvalues must match the count of negative pivots.
template <class Scalar>
class SlicedSolver {
 public:
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
  using ColSparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Candidate = typename ShiftInvertLanczos<Scalar>::Candidate;

  SlicedSolver(const Sparse& a, const SolverOptions& options, double norm_estimate)
      : a_(a), col_(a), options_(options), norm_(norm_estimate), abs_tol_(options.tol * norm_estimate),
        rng_(options.seed) {}

  SpectralResult solve(int k) {
    const Eigen::Index n = a_.rows();
    const int p = options_.block_size > 0 ? options_.block_size : 8;
    // Small requests get small slices unless coverage past lambda_1 is wanted.
    const int slice = options_.slice_size > 0     ? options_.slice_size
                      : options_.cover_multiple > 1.0 ? 48
                                                      : std::clamp(k, 8, 48);

    SpectralResult result;
    result.k_requested = k;
    result.tolerance = abs_tol_;
    Mat kept;  // accepted vectors when keep_vectors
    Mat deflate(n, 0);
    std::vector<double> values;
    std::vector<double> residuals;

    auto current = std::make_unique<ShiftedFactor<Scalar>>(col_);
    double sigma = 0.0;
    if (!current->factor(sigma, norm_) || current->negatives() != 0) {
      throw Error(ErrorKind::invalid_argument, "operator is not positive definite");
    }
    raise_start(current, sigma);
    Eigen::Index below = 0;
    int iterations = 0;
    bool failed = false;

    const auto limit = static_cast<std::size_t>(effective_limit(k, options_, n));
    auto more = [&] {
      if (values.size() < static_cast<std::size_t>(k)) return true;
      return options_.cover_multiple > 0.0 && values.back() < options_.cover_multiple * values.front() &&
             values.size() < limit;
    };
    while (more() && !failed && below < n) {
      // Full slices even near the end; surplus values are dropped below.
      const int want = slice;
      ShiftInvertLanczos<Scalar> lanczos(a_, *current, deflate, p, rng_);
      const Eigen::Index room = n - below;
      const Eigen::Index needed = std::min<Eigen::Index>(want, room);
      // Past the soft budget a partial prefix is accepted and the next
      // shift picks up the rest.
      Eigen::Index soft = std::min<Eigen::Index>(room, 3 * needed + 2 * p);
      Eigen::Index hard = std::min<Eigen::Index>(room, 6 * needed + 4 * p);
      // Dense clusters need a longer basis; the budget doubles a few times.
      int growth = 0;
      auto extend = [&] {
        if (lanczos.exhausted() || growth >= 3 || hard >= room) return false;
        ++growth;
        soft = std::min<Eigen::Index>(room, 2 * soft);
        hard = std::min<Eigen::Index>(room, 2 * hard);
        return true;
      };
      bool accepted = false;
      int certification_failures = 0;
      int cooldown = 0;
      while (!accepted) {
        lanczos.step();
        ++iterations;
        if (iterations > options_.max_iterations) break;
        const bool last_chance = lanczos.exhausted() || lanczos.basis_size() >= hard;
        if (cooldown > 0 && !last_chance) {
          --cooldown;
          continue;
        }
        const bool over = lanczos.exhausted() || lanczos.basis_size() >= soft;
        // Too few vectors to hold the slice: skip the projected solve.
        if (!over && (lanczos.basis_size() < needed + p || iterations % 2 != 0)) continue;
        auto cand = lanczos.ritz(sigma);
        std::size_t prefix = 0;
        while (prefix < cand.size() && cand[prefix].estimate <= abs_tol_) ++prefix;
        const bool enough = static_cast<Eigen::Index>(prefix) >= needed;
        if (!enough && !(over && prefix > 0)) {
          if (last_chance && !extend()) break;
          continue;
        }
        Mat block = lanczos.vectors(cand, prefix);
        std::size_t verified = 0;
        {
          Mat r = a_ * block;
          for (std::size_t j = 0; j < prefix; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            cand[j].residual = (r.col(jj) - cand[j].value * block.col(jj)).norm();
            if (cand[j].residual > abs_tol_) break;
            ++verified;
          }
        }
        // Boundary in a gap after the prefix; back off through clusters.
        while (verified > 0) {
          const double last = cand[verified - 1].value;
          const double next = verified < cand.size() ? cand[verified].value : last + std::max(last - sigma, 1.0);
          const double margin = 4.0 * (cand[verified - 1].residual + abs_tol_);
          if (next - last > 2.0 * margin + 1e-12 * std::abs(last)) break;
          --verified;
        }
        if (verified == 0 || (static_cast<Eigen::Index>(verified) < needed && !over)) {
          if (last_chance && !extend()) break;
          continue;
        }
        const double last = cand[verified - 1].value;
        const double next = verified < cand.size() ? cand[verified].value : last + std::max(last - sigma, 1.0);
        // Each failed certification pulls the boundary closer to `last`.
        const double hi = last + std::ldexp(0.5, -certification_failures) * (next - last);
        auto trial = std::make_unique<ShiftedFactor<Scalar>>(col_);
        const Eigen::Index expected = below + static_cast<Eigen::Index>(verified);
        if (!trial->factor(hi, norm_) || trial->negatives() != expected) {
          if (++certification_failures > 8 || (last_chance && !extend())) break;
          cooldown = 2;
          continue;
        }
        block.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(verified));
        if (options_.keep_vectors && kept.cols() > 0) realign(block, kept, cand);
        for (std::size_t j = 0; j < verified; ++j) {
          values.push_back(cand[j].value);
          residuals.push_back(cand[j].residual);
        }
        if (options_.keep_vectors) {
          Mat grown(n, kept.cols() + block.cols());
          grown << kept, block;
          kept = std::move(grown);
        }
        deflate = std::move(block);
        below = expected;
        sigma = hi;
        current = std::move(trial);
        accepted = true;
      }
      if (!accepted) failed = true;
    }

    const std::size_t take = covered_count(values, k, options_, n);
    result.eigenvalues.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(take));
    result.residuals.assign(residuals.begin(), residuals.begin() + static_cast<std::ptrdiff_t>(take));
    if (options_.keep_vectors && kept.cols() > 0) {
      result.vectors = kept.leftCols(static_cast<Eigen::Index>(take)).template cast<Complex>();
    }
    result.iterations = iterations;
    result.k_converged = static_cast<int>(take);
    result.converged = static_cast<int>(take) >= k;
    return result;
  }

 private:
  // Vectors from separate slices are orthogonal only to residual/gap. Project
  // the new block off the kept ones and redo Rayleigh-Ritz inside it.
  void realign(Mat& block, const Mat& kept, std::vector<Candidate>& cand) const {
    for (int pass = 0; pass < 2; ++pass) block -= kept * (kept.adjoint() * block);
    const Eigen::Index m = block.cols();
    Eigen::HouseholderQR<Mat> qr(block);
    const Mat q = qr.householderQ() * Mat::Identity(block.rows(), m);
    const Mat h = q.adjoint() * (a_ * q);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
    block = q * es.eigenvectors();
    const Mat r = a_ * block;
    for (Eigen::Index j = 0; j < m; ++j) {
      auto& c = cand[static_cast<std::size_t>(j)];
      c.value = es.eigenvalues()(j);
      c.residual = (r.col(j) - c.value * block.col(j)).norm();
    }
  }

  // A shift at zero is far from a clustered bottom of the spectrum. A few
  // inverse iterations give a Rayleigh quotient above lambda_1; the first
  // trial shift below it with zero inertia becomes the starting point.
  void raise_start(std::unique_ptr<ShiftedFactor<Scalar>>& current, double& sigma) {
    const Eigen::Index n = a_.rows();
    if (n < 2) return;
    Mat x(n, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = random_entry<Scalar>(rng_, normal);
    for (int it = 0; it < 4; ++it) {
      x = current->solve(x);
      x /= x.norm();
    }
    const double theta = std::real((x.adjoint() * (a_ * x))(0, 0));
    for (double f : {0.9, 0.8, 0.6, 0.2}) {
      auto trial = std::make_unique<ShiftedFactor<Scalar>>(col_);
      if (trial->factor(f * theta, norm_) && trial->negatives() == 0) {
        sigma = f * theta;
        current = std::move(trial);
        return;
      }
    }
  }

  const Sparse& a_;
  ColSparse col_;
  SolverOptions options_;
  double norm_;
  double abs_tol_;
  std::mt19937_64 rng_;
};

template <class Scalar>
SpectralResult dense_solve(const Eigen::SparseMatrix<Scalar, Eigen::RowMajor>& a, int k, bool keep_vectors) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat dense = Mat(a);
  Eigen::SelfAdjointEigenSolver<Mat> es(dense);
  SpectralResult result;
  result.k_requested = k;
  const Mat v = es.eigenvectors().leftCols(k);
  const Mat av = dense * v;
  for (int j = 0; j < k; ++j) {
    result.eigenvalues.push_back(es.eigenvalues()(j));
    result.residuals.push_back((av.col(j) - es.eigenvalues()(j) * v.col(j)).norm());
  }
  if (keep_vectors) result.vectors = v.template cast<Complex>();
  return result;
}

}  // namespace

const SpectralResult& SpectralResult::require_converged() const {
  if (!converged) {
    throw Error(ErrorKind::not_converged, std::to_string(k_converged) + " of " + std::to_string(k_requested) +
                                              " eigenpairs converged");
  }
  return *this;
}

int SpectralResult::count_below(double lambda) const {
  return static_cast<int>(std::lower_bound(eigenvalues.begin(), eigenvalues.end(), lambda) - eigenvalues.begin());
}

SpectralResult dense_spectrum(const LinearOperatorMatrix& op, bool keep_vectors) {
  if (op.dimension() > SpectralDecomposition::kMaxDenseDimension) {
    throw Error(ErrorKind::dimension_too_large_for_dense, "dimension " + std::to_string(op.dimension()));
  }
  const int k = static_cast<int>(op.dimension());
  SpectralResult result =
      op.is_real() ? dense_solve<double>(op.real_part(), k, keep_vectors) : dense_solve<Complex>(op.entries, k, keep_vectors);
  result.field = op.field;
  result.grid_spacing = op.spacing;
  result.norm_estimate = op.norm_estimate();
  result.tolerance = 1e-12 * result.norm_estimate;
  result.k_converged = k;
  result.converged = true;
  return result;
}

SpectralResult lowest_eigenpairs(const LinearOperatorMatrix& op, int k, const SolverOptions& options) {
  const Eigen::Index n = op.dimension();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_argument, "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (!(options.tol > 0.0)) throw Error(ErrorKind::invalid_argument, "tolerance must be positive");

  const double norm = op.norm_estimate();
  bool dense = options.method == SolverMethod::dense;
  if (options.method == SolverMethod::automatic) dense = n <= 600 || 3 * static_cast<Eigen::Index>(k) >= n;

  SpectralResult result;
  if (dense) {
    if (n > SpectralDecomposition::kMaxDenseDimension) {
      throw Error(ErrorKind::dimension_too_large_for_dense, "dimension " + std::to_string(n));
    }
    const int kd = static_cast<int>(effective_limit(k, options, n));
    result = op.is_real() ? dense_solve<double>(op.real_part(), kd, options.keep_vectors)
                          : dense_solve<Complex>(op.entries, kd, options.keep_vectors);
    const std::size_t take = covered_count(result.eigenvalues, k, options, n);
    result.eigenvalues.resize(take);
    result.residuals.resize(take);
    if (options.keep_vectors) result.vectors.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(take));
    result.k_requested = k;
    result.tolerance = options.tol * norm;
    result.k_converged = static_cast<int>(std::count_if(result.residuals.begin(), result.residuals.end(),
                                                        [&](double r) { return r <= result.tolerance; }));
    result.converged = result.k_converged == static_cast<int>(take);
  } else if (op.is_real()) {
    const SparseReal real = op.real_part();
    SlicedSolver<double> solver(real, options, norm);
    result = solver.solve(k);
  } else {
    SlicedSolver<Complex> solver(op.entries, options, norm);
    result = solver.solve(k);
  }
  result.field = op.field;
  result.grid_spacing = op.spacing;
  result.norm_estimate = norm;
  return result;
}

// ---------------------------------------------------------------------------

SpectralDecomposition::SpectralDecomposition(const LinearOperatorMatrix& op) {
  if (op.dimension() > kMaxDenseDimension) {
    throw Error(ErrorKind::dimension_too_large_for_dense,
                "dimension " + std::to_string(op.dimension()) + " exceeds " + std::to_string(kMaxDenseDimension));
  }
  if (op.is_real()) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(op.real_part());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors().cast<Complex>();
  } else {
    const ComplexMatrix dense = ComplexMatrix(op.entries);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(dense);
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }
}

ComplexVector SpectralDecomposition::apply_power(double exponent, const ComplexVector& v) const {
  if (v.size() != vectors_.rows()) throw Error(ErrorKind::invalid_argument, "vector size mismatch");
  Eigen::VectorXd scaled(values_.size());
  for (Eigen::Index j = 0; j < values_.size(); ++j) scaled(j) = std::pow(std::max(values_(j), 0.0), exponent);
  const ComplexVector coeffs = vectors_.adjoint() * v;
  return vectors_ * (scaled.cast<Complex>().asDiagonal() * coeffs);
}

ComplexVector fractional_apply(const LinearOperatorMatrix& op, double exponent, const ComplexVector& v) {
  if (!(exponent > 0.0) || exponent > 1.0) {
    throw Error(ErrorKind::invalid_argument, "exponent must lie in (0, 1]");
  }
  if (v.size() != op.dimension()) throw Error(ErrorKind::invalid_argument, "vector size mismatch");
  if (exponent == 1.0) return op.entries * v;
  return SpectralDecomposition(op).apply_power(exponent, v);
}

BoundReport davies_inequality_check(const SpectralDecomposition& decomposition, const LinearOperatorMatrix& op,
                                    const GridDomain& grid, double c, double beta, const ComplexVector& u) {
  if (!(c >= 2.0)) throw Error(ErrorKind::invalid_argument, "Davies constant c must be at least 2");
  if (!(beta > 0.0)) throw Error(ErrorKind::invalid_argument, "beta must be positive");
  if (u.size() != op.dimension()) throw Error(ErrorKind::invalid_argument, "vector size mismatch");

  const double cell = std::pow(grid.spacing, grid.dim);
  double shell = 0.0;
  double band = 0.0;  // mass one lattice step beyond the shell edge
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    const double mass = std::norm(u(static_cast<Eigen::Index>(i))) * cell;
    const double d = grid.distance[i];
    if (d < beta) shell += mass;
    else if (d < beta + grid.spacing) band += mass;
  }
  const ComplexVector hu = op.entries * u;
  const ComplexVector hcu = decomposition.apply_power(1.0 / c, u);
  const double power = 2.0 + 2.0 / c;
  const double rhs = std::pow(c, power) * std::pow(beta, power) * cell * hu.norm() * hcu.norm();

  BoundReport report;
  report.inequality_id = InequalityId::davies_boundary;
  report.lhs = shell;
  report.rhs = rhs;
  report.slack = rhs - shell;
  report.tolerance_budget = band;
  report.verdict = classify(report.slack, report.tolerance_budget);
  report.parameter_kind = ParameterKind::beta;
  report.parameter = beta;
  report.field = op.field;
  report.spacing = grid.spacing;
  return report;
}

BoundReport davies_inequality_check(const LinearOperatorMatrix& op, const GridDomain& grid, double c, double beta,
                                    const ComplexVector& u) {
  return davies_inequality_check(SpectralDecomposition(op), op, grid, c, beta, u);
}

}  // namespace spectrolab
