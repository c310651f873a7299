#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sequtil/cmp.hpp"

namespace sequtil {

/**
 * Finite probability mixture over trajectories and nested lotteries.
 *
 * Templated on the probability type so that compound-lottery algebra can be
 * checked in exact rational arithmetic. Nested lotteries are shared immutable
 * values.
 */
template <typename Scalar>
class BasicLottery {
 public:
  struct Entry {
    Entry(Scalar p, Trajectory tau) : probability(std::move(p)), item(std::move(tau)) {}
    Entry(Scalar p, BasicLottery nested)
        : probability(std::move(p)),
          item(std::make_shared<const BasicLottery>(std::move(nested))) {}

    bool is_trajectory() const { return std::holds_alternative<Trajectory>(item); }
    const Trajectory& trajectory() const { return std::get<Trajectory>(item); }
    const BasicLottery& nested() const { return *std::get<std::shared_ptr<const BasicLottery>>(item); }

    Scalar probability;
    std::variant<Trajectory, std::shared_ptr<const BasicLottery>> item;
  };

  /// Throws std::invalid_argument on an empty list, a negative probability, or
  /// probabilities that do not sum to one within 1e-12.
  explicit BasicLottery(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("lottery has no entries");
    Scalar total(0);
    for (const auto& e : entries_) {
      if (e.probability < Scalar(0)) throw std::invalid_argument("negative lottery probability");
      total += e.probability;
    }
    Scalar gap = total - Scalar(1);
    if (gap < Scalar(0)) gap = -gap;
    if (gap > Scalar(1e-12)) throw std::invalid_argument("lottery probabilities do not sum to 1");
  }

  static BasicLottery sure(Trajectory tau) {
    std::vector<Entry> e;
    e.emplace_back(Scalar(1), std::move(tau));
    return BasicLottery(std::move(e));
  }

  const std::vector<Entry>& entries() const { return entries_; }

  bool is_flat() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return e.is_trajectory(); });
  }

  friend bool operator==(const BasicLottery& a, const BasicLottery& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const Entry& x = a.entries_[i];
      const Entry& y = b.entries_[i];
      if (!(x.probability == y.probability) || x.is_trajectory() != y.is_trajectory()) return false;
      if (x.is_trajectory() ? !(x.trajectory() == y.trajectory()) : !(x.nested() == y.nested())) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
};

using Lottery = BasicLottery<double>;

/// p·a + (1 − p)·b as a compound lottery.
template <typename Scalar>
BasicLottery<Scalar> mixture(const Scalar& p, BasicLottery<Scalar> a, BasicLottery<Scalar> b) {
  std::vector<typename BasicLottery<Scalar>::Entry> e;
  e.emplace_back(p, std::move(a));
  e.emplace_back(Scalar(1) - p, std::move(b));
  return BasicLottery<Scalar>(std::move(e));
}

namespace detail {

template <typename Scalar>
void accumulate(const BasicLottery<Scalar>& l, const Scalar& weight,
                std::map<Trajectory, std::vector<Scalar>>& out) {
  for (const auto& e : l.entries()) {
    Scalar w = weight * e.probability;
    if (e.is_trajectory()) {
      out[e.trajectory()].push_back(std::move(w));
    } else {
      accumulate(e.nested(), w, out);
    }
  }
}

template <typename Scalar>
void check_anchor(StateIndex at, const BasicLottery<Scalar>& l) {
  for (const auto& e : l.entries()) {
    if (e.is_trajectory()) {
      if (e.trajectory().start() != at) throw AnchorMismatch(at, e.trajectory().start());
    } else {
      check_anchor(at, e.nested());
    }
  }
}

}  // namespace detail

/**
 * Reduces a compound lottery to a single-stage one.
 *
 * Entries come out in canonical trajectory order with duplicates merged; the
 * contributions to each trajectory are summed in ascending order so the result
 * does not depend on nesting layout.
 */
template <typename Scalar>
BasicLottery<Scalar> flatten(const BasicLottery<Scalar>& l) {
  std::map<Trajectory, std::vector<Scalar>> parts;
  detail::accumulate(l, Scalar(1), parts);
  std::vector<typename BasicLottery<Scalar>::Entry> entries;
  entries.reserve(parts.size());
  for (auto& [tau, ps] : parts) {
    std::sort(ps.begin(), ps.end());
    Scalar total(0);
    for (const auto& p : ps) total += p;
    entries.emplace_back(std::move(total), tau);
  }
  return BasicLottery<Scalar>(std::move(entries));
}

/// Prefixes every trajectory of l with `prefix`, keeping probabilities and
/// nesting. Throws AnchorMismatch if some trajectory does not start at prefix.end().
template <typename Scalar>
BasicLottery<Scalar> concat(const Trajectory& prefix, const BasicLottery<Scalar>& l) {
  detail::check_anchor(prefix.end(), l);
  std::vector<typename BasicLottery<Scalar>::Entry> entries;
  entries.reserve(l.entries().size());
  for (const auto& e : l.entries()) {
    if (e.is_trajectory()) {
      entries.emplace_back(e.probability, concat(prefix, e.trajectory()));
    } else {
      entries.emplace_back(e.probability, concat(prefix, e.nested()));
    }
  }
  return BasicLottery<Scalar>(std::move(entries));
}

/// Expected utility Σ p(τ)·u(τ) over flatten(l), with u supplied as a callable.
template <typename Scalar, typename UtilityFn>
Scalar expected_utility(const BasicLottery<Scalar>& l, UtilityFn&& utility) {
  Scalar total(0);
  const BasicLottery<Scalar> flat = flatten(l);
  for (const auto& e : flat.entries()) total += e.probability * utility(e.trajectory());
  return total;
}

}  // namespace sequtil
