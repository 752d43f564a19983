#include "kktbt/sparse_ldlt.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kktbt/bunch_kaufman.hpp"

namespace kktbt {
namespace {

using Entry = std::pair<Index, double>;
using Row = std::vector<Entry>;

// Merges `update` (sorted, scaled by `scale` per entry via callback) into
// `row`, dropping the eliminated indices. Both inputs are sorted by index.
template <typename UpdateValue>
Row merge_update(const Row& row, const std::vector<Index>& nb, UpdateValue&& update_value, Index self,
                 Index drop0, Index drop1) {
  Row out;
  out.reserve(row.size() + nb.size());
  std::size_t a = 0, b = 0;
  while (a < row.size() || b < nb.size()) {
    const Index ia = a < row.size() ? row[a].first : Index(-1);
    const Index ib = b < nb.size() ? nb[b] : Index(-1);
    Index idx;
    double v = 0.0;
    if (ib < 0 || (ia >= 0 && ia < ib)) {
      idx = ia;
      v = row[a++].second;
    } else if (ia < 0 || ib < ia) {
      idx = ib;
      v = update_value(b++);
    } else {
      idx = ia;
      v = row[a++].second + update_value(b++);
    }
    if (idx == self || idx == drop0 || idx == drop1) continue;
    out.emplace_back(idx, v);
  }
  return out;
}

}  // namespace

SparseLdltBaseline::SparseLdltBaseline(const SymmetricSparse& m, SparseLdltOptions opts) {
  dim_ = m.dim();
  input_nnz_ = m.nnz();
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
  const double zero_tol = opts.zero_pivot_tol * max_abs(m.lower());
  const double inertia_tol = opts.inertia_zero_tol * max_abs(m.lower());

  const SparseMatrix full = m.full();
  const SparseMatrix input_pattern = pattern_of(full);
  auto in_input = [&](Index i, Index j) { return input_pattern.coeff(i, j) != 0.0; };

  std::vector<Row> rows(static_cast<std::size_t>(dim_));
  std::vector<double> diag(static_cast<std::size_t>(dim_), 0.0);
  for (Index j = 0; j < full.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(full, j); it; ++it) {
      if (it.row() == j)
        diag[static_cast<std::size_t>(j)] = it.value();
      else
        rows[static_cast<std::size_t>(it.row())].emplace_back(j, it.value());
    }

  std::vector<Index> order(static_cast<std::size_t>(dim_));
  for (Index i = 0; i < dim_; ++i)
    order[static_cast<std::size_t>(i)] = opts.order == EliminationOrder::Natural ? i : dim_ - 1 - i;
  std::vector<char> active(static_cast<std::size_t>(dim_), 1);

  for (const Index k : order) {
    if (!active[static_cast<std::size_t>(k)]) continue;
    Row& rk = rows[static_cast<std::size_t>(k)];
    const double akk = diag[static_cast<std::size_t>(k)];
    double lambda = 0.0;
    Index r = -1;
    for (const auto& [i, v] : rk)
      if (std::abs(v) > lambda) {
        lambda = std::abs(v);
        r = i;
      }

    Step step;
    step.k = k;
    if (std::max(std::abs(akk), lambda) <= zero_tol) {
      step.null = true;
      step.d11 = akk;
      for (const auto& [i, v] : rk) {
        Row& ri = rows[static_cast<std::size_t>(i)];
        std::erase_if(ri, [k](const Entry& e) { return e.first == k; });
      }
      rk.clear();
      active[static_cast<std::size_t>(k)] = 0;
      ++b_nnz_;
      inertia_.zero += 1;
      steps_.push_back(std::move(step));
      continue;
    }

    if (std::abs(akk) >= alpha * lambda) {
      const double d = akk;
      step.d11 = d;
      const std::size_t m_ = rk.size();
      step.rows.reserve(m_);
      step.l0.reserve(m_);
      std::vector<double> a(m_);
      for (std::size_t t = 0; t < m_; ++t) {
        step.rows.push_back(rk[t].first);
        a[t] = rk[t].second;
        step.l0.push_back(rk[t].second / d);
      }
      for (std::size_t t = 0; t < m_; ++t) {
        const Index i = step.rows[t];
        const double li = step.l0[t];
        diag[static_cast<std::size_t>(i)] -= li * a[t];
        Row& ri = rows[static_cast<std::size_t>(i)];
        ri = merge_update(ri, step.rows, [&](std::size_t s) { return -li * a[s]; }, i, k, -1);
      }
      const auto mm = static_cast<std::uint64_t>(m_);
      flops_ += mm + mm * (mm + 1);
      ++b_nnz_;
      inertia_ = inertia_ + pivot_inertia(PivotBlock<double>{0, PivotKind::OneByOne, d, 0.0, 0.0}, inertia_tol);
      rk.clear();
      active[static_cast<std::size_t>(k)] = 0;
    } else {
      Row& rr = rows[static_cast<std::size_t>(r)];
      double akr = 0.0;
      for (const auto& [i, v] : rk)
        if (i == r) akr = v;
      const double arr = diag[static_cast<std::size_t>(r)];
      const double det = akk * arr - akr * akr;
      if (std::abs(det) <= opts.breakdown_tol * (std::abs(akk * arr) + akr * akr))
        throw BaselineBreakdown("singular 2x2 pivot at columns " + std::to_string(k) + "," + std::to_string(r));
      const double i11 = arr / det, i21 = -akr / det, i22 = akk / det;
      step.r = r;
      step.d11 = akk;
      step.d21 = akr;
      step.d22 = arr;

      // Union of both pivot rows, excluding the pivot pair itself.
      std::vector<double> a0, a1;
      {
        std::size_t p = 0, q = 0;
        while (p < rk.size() || q < rr.size()) {
          const Index ip = p < rk.size() ? rk[p].first : Index(-1);
          const Index iq = q < rr.size() ? rr[q].first : Index(-1);
          Index idx;
          double v0 = 0.0, v1 = 0.0;
          if (iq < 0 || (ip >= 0 && ip < iq)) {
            idx = ip;
            v0 = rk[p++].second;
          } else if (ip < 0 || iq < ip) {
            idx = iq;
            v1 = rr[q++].second;
          } else {
            idx = ip;
            v0 = rk[p++].second;
            v1 = rr[q++].second;
          }
          if (idx == k || idx == r) continue;
          step.rows.push_back(idx);
          a0.push_back(v0);
          a1.push_back(v1);
        }
      }
      const std::size_t m_ = step.rows.size();
      step.l0.resize(m_);
      step.l1.resize(m_);
      for (std::size_t t = 0; t < m_; ++t) {
        step.l0[t] = a0[t] * i11 + a1[t] * i21;
        step.l1[t] = a0[t] * i21 + a1[t] * i22;
      }
      for (std::size_t t = 0; t < m_; ++t) {
        const Index i = step.rows[t];
        const double l0 = step.l0[t], l1 = step.l1[t];
        diag[static_cast<std::size_t>(i)] -= l0 * a0[t] + l1 * a1[t];
        Row& ri = rows[static_cast<std::size_t>(i)];
        ri = merge_update(ri, step.rows, [&](std::size_t s) { return -(l0 * a0[s] + l1 * a1[s]); }, i, k, r);
      }
      const auto mm = static_cast<std::uint64_t>(m_);
      flops_ += 6 + 8 * mm + 2 * mm * (mm + 1);
      b_nnz_ += 3;
      ++two_by_two_;
      inertia_ = inertia_ + pivot_inertia(PivotBlock<double>{0, PivotKind::TwoByTwo, akk, akr, arr}, inertia_tol);
      rk.clear();
      rr.clear();
      active[static_cast<std::size_t>(k)] = 0;
      active[static_cast<std::size_t>(r)] = 0;
    }

    const Index ncols = step.r >= 0 ? 2 : 1;
    l_nnz_ += ncols * static_cast<Index>(step.rows.size());
    for (const Index i : step.rows) {
      fill_nnz_ += !in_input(i, step.k);
      if (step.r >= 0) fill_nnz_ += !in_input(i, step.r);
    }
    if (step.r >= 0) fill_nnz_ += !in_input(step.k, step.r);
    steps_.push_back(std::move(step));
  }
}

std::vector<Index> SparseLdltBaseline::elimination_sequence() const {
  std::vector<Index> seq;
  seq.reserve(static_cast<std::size_t>(dim_));
  for (const auto& s : steps_) {
    seq.push_back(s.k);
    if (s.r >= 0) seq.push_back(s.r);
  }
  return seq;
}

Vector SparseLdltBaseline::solve(const Vector& rhs, FlopCounter* flops) const {
  if (rhs.size() != dim_) throw DimensionError("rhs length does not match baseline factor dimension");
  Vector y = rhs;
  for (const auto& s : steps_) {
    const double yk = y[s.k];
    const double yr = s.r >= 0 ? y[s.r] : 0.0;
    for (std::size_t t = 0; t < s.rows.size(); ++t) {
      y[s.rows[t]] -= s.l0[t] * yk;
      if (s.r >= 0) y[s.rows[t]] -= s.l1[t] * yr;
    }
  }
  for (const auto& s : steps_) {
    if (s.null) {
      y[s.k] = 0.0;
    } else if (s.r < 0) {
      y[s.k] /= s.d11;
    } else {
      const double det = s.d11 * s.d22 - s.d21 * s.d21;
      const double a = y[s.k], b = y[s.r];
      y[s.k] = (s.d22 * a - s.d21 * b) / det;
      y[s.r] = (s.d11 * b - s.d21 * a) / det;
    }
  }
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    const auto& s = *it;
    for (std::size_t t = 0; t < s.rows.size(); ++t) {
      y[s.k] -= s.l0[t] * y[s.rows[t]];
      if (s.r >= 0) y[s.r] -= s.l1[t] * y[s.rows[t]];
    }
  }
  count_flops(flops, static_cast<std::uint64_t>(4 * l_nnz_ + 2 * dim_));
  return y;
}

}  // namespace kktbt
