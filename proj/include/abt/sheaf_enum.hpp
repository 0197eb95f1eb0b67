#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "abt/sheafcheck.hpp"

namespace abt::sheaf {

/// Enumerates (or samples) functorial presheaves on a truncated site by
/// assigning arrow actions with backtracking. Composites are derived from
/// assigned factors wherever possible, so branching happens only on
/// generating arrows.
class FunctorEnumerator {
 public:
  explicit FunctorEnumerator(const TruncatedSite& site) : site_(site) {
    const auto& arrows = site.arrows();
    const int n = static_cast<int>(arrows.size());
    composite_of_.resize(n);
    constraining_.resize(n);
    for (int f = 0; f < n; ++f) {
      if (site.is_identity(f)) continue;  // identity factors constrain nothing
      for (int g : site.arrows_from(arrows[f].dst)) {
        if (site.is_identity(g)) continue;
        int c = site.compose(g, f);
        int t = static_cast<int>(triples_.size());
        triples_.push_back({f, g, c});
        composite_of_[c].push_back(t);
        constraining_[f].push_back(t);
        constraining_[g].push_back(t);
        if (c != f && c != g) constraining_[c].push_back(t);
      }
    }
    order_ = arrow_order();
    iso_classes();
  }

  /// Visits every functorial presheaf whose fibers are all <= max_fiber.
  /// Fiber labels are e0, e1, ... per object.
  void enumerate_all(int max_fiber, const std::function<void(const FinitePresheaf&)>& fn) const {
    std::vector<int> class_size(class_count_, 0);
    enum_profiles(0, max_fiber, class_size, [&](const std::vector<int>& sizes) {
      std::vector<std::vector<int>> action(site_.arrows().size());
      std::vector<char> assigned(site_.arrows().size(), 0);
      std::vector<int> trail;
      preassign_identities(sizes, action, assigned);
      search(sizes, action, assigned, trail, 0, nullptr,
             [&](const std::vector<std::vector<int>>& act) {
               fn(build(sizes, act));
               return false;  // keep enumerating
             });
    });
  }

  /// Samples one functorial presheaf with fibers <= max_fiber. Searches
  /// under a node budget and restarts with a fresh profile when the budget
  /// runs out, which sidesteps the heavy tail of unlucky branch orders.
  FinitePresheaf sample(int max_fiber, std::mt19937_64& rng) const {
    for (long budget = 20000;; budget += budget / 2) {
      std::vector<int> sizes = random_profile(max_fiber, rng);
      std::vector<std::vector<int>> action(site_.arrows().size());
      std::vector<char> assigned(site_.arrows().size(), 0);
      std::vector<int> trail;
      preassign_identities(sizes, action, assigned);
      std::optional<FinitePresheaf> found;
      long nodes = budget;
      search(sizes, action, assigned, trail, 0, &rng,
             [&](const std::vector<std::vector<int>>& act) {
               found = build(sizes, act);
               return true;  // stop at the first solution
             },
             &nodes);
      if (found) return std::move(*found);
    }
  }

 private:
  struct Triple {
    int f, g, c;  // c = g . f
  };

  void iso_classes() {
    const auto& objects = site_.objects();
    std::map<std::vector<Sort>, int> keys;
    class_of_.resize(objects.size());
    for (std::size_t o = 0; o < objects.size(); ++o) {
      std::vector<Sort> key;
      for (const auto& [n, s] : objects[o].bindings()) key.push_back(s);
      std::sort(key.begin(), key.end());
      auto [it, fresh] = keys.emplace(key, static_cast<int>(keys.size()));
      class_of_[o] = it->second;
    }
    class_count_ = static_cast<int>(keys.size());
    // class reachability: an arrow forces a nonempty fiber downstream
    std::set<std::pair<int, int>> edges;
    for (const Arrow& a : site_.arrows()) {
      int c1 = class_of_[a.src];
      int c2 = class_of_[a.dst];
      if (c1 != c2) edges.emplace(c1, c2);
    }
    class_edges_.assign(edges.begin(), edges.end());
  }

  void enum_profiles(int cls, int max_fiber, std::vector<int>& sizes,
                     const std::function<void(const std::vector<int>&)>& fn) const {
    if (cls == class_count_) {
      for (const auto& [c1, c2] : class_edges_) {
        if (sizes[c1] > 0 && sizes[c2] == 0) return;
      }
      fn(sizes);
      return;
    }
    for (int k = 0; k <= max_fiber; ++k) {
      sizes[cls] = k;
      enum_profiles(cls + 1, max_fiber, sizes, fn);
    }
  }

  std::vector<int> random_profile(int max_fiber, std::mt19937_64& rng) const {
    std::uniform_int_distribution<int> d(0, max_fiber);
    for (;;) {
      std::vector<int> sizes(class_count_);
      for (int& s : sizes) s = d(rng);
      bool ok = true;
      for (const auto& [c1, c2] : class_edges_) {
        if (sizes[c1] > 0 && sizes[c2] == 0) ok = false;
      }
      if (ok) return sizes;
    }
  }

  std::vector<int> arrow_order() const {
    std::vector<int> order;
    for (int a = 0; a < static_cast<int>(site_.arrows().size()); ++a) {
      if (!site_.is_identity(a)) order.push_back(a);
    }
    // Group arrows by how far they extend the context, then by target, so
    // that the paths that must agree on a composite are assigned close
    // together and conflicts surface early.
    auto key = [&](int a) {
      const Arrow& arr = site_.arrows()[a];
      int src = static_cast<int>(site_.objects()[arr.src].bindings().size());
      int dst = static_cast<int>(site_.objects()[arr.dst].bindings().size());
      return std::make_tuple(dst - src, dst, arr.dst, arr.src, a);
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    return order;
  }

  void preassign_identities(const std::vector<int>& class_sizes,
                            std::vector<std::vector<int>>& action,
                            std::vector<char>& assigned) const {
    for (int o = 0; o < static_cast<int>(site_.objects().size()); ++o) {
      int id = site_.identity(o);
      std::vector<int> v(fiber(class_sizes, o));
      std::iota(v.begin(), v.end(), 0);
      action[id] = std::move(v);
      assigned[id] = 1;
    }
  }

  std::size_t fiber(const std::vector<int>& class_sizes, int obj) const {
    return static_cast<std::size_t>(class_sizes[class_of_[obj]]);
  }

  /// Assigns `arrow` and closes under composition: composites with both
  /// factors assigned are derived immediately, and every fully assigned
  /// triple is verified. Newly assigned arrows are journalled on `trail`.
  /// Returns false on the first inconsistency.
  bool assign_and_close(int arrow, std::vector<int> fn, std::vector<std::vector<int>>& action,
                        std::vector<char>& assigned, std::vector<int>& trail) const {
    action[arrow] = std::move(fn);
    assigned[arrow] = 1;
    trail.push_back(arrow);
    std::size_t head = trail.size() - 1;
    while (head < trail.size()) {
      int x = trail[head++];
      for (int t : constraining_[x]) {
        const Triple& tr = triples_[t];
        const bool have_f = assigned[tr.f];
        const bool have_g = assigned[tr.g];
        const bool have_c = assigned[tr.c];
        if (have_f && have_g) {
          const std::vector<int>& af = action[tr.f];
          const std::vector<int>& ag = action[tr.g];
          if (have_c) {
            const std::vector<int>& ac = action[tr.c];
            for (std::size_t e = 0; e < af.size(); ++e) {
              if (ac[e] != ag[af[e]]) return false;
            }
          } else {
            std::vector<int> derived(af.size());
            for (std::size_t e = 0; e < af.size(); ++e) derived[e] = ag[af[e]];
            action[tr.c] = std::move(derived);
            assigned[tr.c] = 1;
            trail.push_back(tr.c);
          }
        }
      }
    }
    return true;
  }

  void undo_to(std::size_t mark, std::vector<std::vector<int>>& action,
               std::vector<char>& assigned, std::vector<int>& trail) const {
    while (trail.size() > mark) {
      int a = trail.back();
      trail.pop_back();
      assigned[a] = 0;
      action[a].clear();
    }
  }

  /// Backtracking over the non-identity arrows in `order_`; `found` returns
  /// true to cut the search after a solution (sampling mode). When `nodes`
  /// is given, the search gives up once the budget is exhausted.
  bool search(const std::vector<int>& sizes, std::vector<std::vector<int>>& action,
              std::vector<char>& assigned, std::vector<int>& trail, std::size_t idx,
              std::mt19937_64* rng,
              const std::function<bool(const std::vector<std::vector<int>>&)>& found,
              long* nodes = nullptr) const {
    if (nodes && --*nodes < 0) return true;  // budget exhausted, unwind
    while (idx < order_.size() && assigned[order_[idx]]) ++idx;
    if (idx == order_.size()) return found(action);
    int a = order_[idx];
    const Arrow& arr = site_.arrows()[a];
    const std::size_t src_n = fiber(sizes, arr.src);
    const std::size_t dst_n = fiber(sizes, arr.dst);
    if (src_n > 0 && dst_n == 0) return false;

    // Same-size arrows are isomorphisms of the site, so their actions must
    // be bijections; enumerating permutations only prunes the search.
    const bool iso = site_.objects()[arr.src].bindings().size() ==
                     site_.objects()[arr.dst].bindings().size();
    std::vector<std::vector<int>> candidates;
    if (iso) {
      if (src_n != dst_n) return false;
      std::vector<int> perm(src_n);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        candidates.push_back(perm);
      } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
      std::size_t total = 1;
      for (std::size_t e = 0; e < src_n; ++e) total *= dst_n;
      for (std::size_t c = 0; c < total; ++c) {
        std::vector<int> fn(src_n);
        std::size_t rest = c;
        for (std::size_t e = 0; e < src_n; ++e) {
          fn[e] = static_cast<int>(rest % dst_n);
          rest /= dst_n;
        }
        candidates.push_back(std::move(fn));
      }
    }
    if (rng) std::shuffle(candidates.begin(), candidates.end(), *rng);
    for (std::vector<int>& fn : candidates) {
      std::size_t mark = trail.size();
      if (assign_and_close(a, std::move(fn), action, assigned, trail) &&
          search(sizes, action, assigned, trail, idx + 1, rng, found, nodes)) {
        undo_to(mark, action, assigned, trail);
        return true;
      }
      undo_to(mark, action, assigned, trail);
    }
    return false;
  }

  FinitePresheaf build(const std::vector<int>& sizes,
                       const std::vector<std::vector<int>>& action) const {
    FinitePresheaf X;
    X.site = &site_;
    X.labels.resize(site_.objects().size());
    for (int o = 0; o < static_cast<int>(site_.objects().size()); ++o) {
      for (std::size_t e = 0; e < fiber(sizes, o); ++e) {
        X.labels[o].push_back("e" + std::to_string(e));
      }
    }
    X.action = action;
    return X;
  }

  const TruncatedSite& site_;
  std::vector<Triple> triples_;
  std::vector<std::vector<int>> composite_of_;   // arrow -> triples with c == arrow
  std::vector<std::vector<int>> constraining_;   // arrow -> triples mentioning it
  std::vector<int> order_;
  std::vector<int> class_of_;
  int class_count_ = 0;
  std::vector<std::pair<int, int>> class_edges_;
};

struct EnumBudget {
  int exhaustive_max_fiber = 2;
  int random_samples = 500;
  int random_max_fiber = 3;
  std::uint64_t seed = 0x5eed0ab7ULL;
};

struct PresheafVerdict {
  std::string kind;  // "exhaustive" or "random"
  std::vector<std::size_t> fibers;
  bool sheaf = false;
  bool pullbacks = false;
  std::string sheaf_witness;
  std::string pullback_witness;

  bool agree() const { return sheaf == pullbacks; }
};

struct AgreementReport {
  std::size_t objects = 0;
  std::size_t arrows = 0;
  long exhaustive_checked = 0;
  long random_checked = 0;
  long sheaf_count = 0;
  long disagreements = 0;
  std::vector<PresheafVerdict> mismatches;
};

/// Runs is_sheaf and preserves_pullbacks over enumerated and sampled
/// functorial presheaves, asserting the two verdicts agree on every one.
inline AgreementReport check_sheaf_pullback_agreement(
    const TruncatedSite& site, const EnumBudget& budget,
    const std::function<void(const PresheafVerdict&)>& on_record = nullptr) {
  AgreementReport report;
  report.objects = site.objects().size();
  report.arrows = site.arrows().size();
  FunctorEnumerator en(site);

  auto judge = [&](const FinitePresheaf& X, const char* kind, long& counter) {
    PresheafVerdict v;
    v.kind = kind;
    for (std::size_t o = 0; o < X.labels.size(); ++o) v.fibers.push_back(X.fiber_size(static_cast<int>(o)));
    CheckVerdict s = is_sheaf(X);
    CheckVerdict p = preserves_pullbacks(X);
    v.sheaf = s.ok;
    v.pullbacks = p.ok;
    v.sheaf_witness = s.witness;
    v.pullback_witness = p.witness;
    ++counter;
    if (v.sheaf) ++report.sheaf_count;
    if (!v.agree()) {
      ++report.disagreements;
      if (report.mismatches.size() < 16) report.mismatches.push_back(v);
    }
    if (on_record) on_record(v);
  };

  en.enumerate_all(budget.exhaustive_max_fiber,
                   [&](const FinitePresheaf& X) { judge(X, "exhaustive", report.exhaustive_checked); });

  std::mt19937_64 rng(budget.seed);
  for (int i = 0; i < budget.random_samples; ++i) {
    FinitePresheaf X = en.sample(budget.random_max_fiber, rng);
    judge(X, "random", report.random_checked);
  }
  return report;
}

}  // namespace abt::sheaf
