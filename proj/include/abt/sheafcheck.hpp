#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/printer.hpp"
#include "abt/sorts.hpp"

namespace abt::sheaf {

/// An arrow of the truncated site: an injective sort-preserving map between
/// two objects, stored positionally (img[i] is the index in the destination
/// object's bindings of the image of source binding i).
struct Arrow {
  int src = -1;
  int dst = -1;
  std::vector<int> img;

  friend bool operator==(const Arrow&, const Arrow&) = default;
};

/// A finite truncation of the category of symbol contexts. Objects are all
/// contexts of at most interest_size + 1 bindings over a fixed name pool;
/// the extra layer exists so that support questions about elements over
/// interest-layer contexts quantify over enough cocones.
class TruncatedSite {
 public:
  static TruncatedSite make(std::vector<Sort> sorts, int interest_size, int pool_size) {
    // One spare name beyond the interest layer is required for soundness of
    // the support checks at that layer.
    if (pool_size < interest_size + 1) {
      throw Error(ErrorCode::ContextMismatch,
                  "name pool must exceed the interest size by at least one");
    }
    std::vector<std::string> pool;
    for (int i = 0; i < pool_size; ++i) pool.push_back(std::string(1, char('a' + i)));
    return TruncatedSite(std::move(sorts), interest_size, std::move(pool));
  }

  const std::vector<SymbolCtx>& objects() const { return objects_; }
  const std::vector<Arrow>& arrows() const { return arrows_; }
  int interest_size() const { return interest_size_; }
  const std::vector<Sort>& sorts() const { return sorts_; }

  int identity(int obj) const { return identities_[obj]; }
  bool is_identity(int arrow) const { return identities_[arrows_[arrow].src] == arrow; }

  /// Composite `second . first`; both must be composable site arrows.
  int compose(int second, int first) const {
    const Arrow& f = arrows_[first];
    const Arrow& g = arrows_[second];
    assert(f.dst == g.src);
    std::vector<int> img(f.img.size());
    for (std::size_t i = 0; i < f.img.size(); ++i) img[i] = g.img[f.img[i]];
    return find_arrow(f.src, g.dst, img);
  }

  const std::vector<int>& arrows_from(int obj) const { return from_[obj]; }
  const std::vector<int>& arrows_into(int obj) const { return into_[obj]; }

  int find_object(const SymbolCtx& ctx) const {
    std::vector<std::pair<std::string, Sort>> key = ctx.bindings();
    std::sort(key.begin(), key.end());
    auto it = object_index_.find(key);
    return it == object_index_.end() ? -1 : it->second;
  }

  int find_arrow(int src, int dst, const std::vector<int>& img) const {
    auto it = arrow_index_.find(std::make_tuple(src, dst, img));
    assert(it != arrow_index_.end());
    return it->second;
  }

  /// The inclusion of the sub-object on the given binding positions
  /// (ascending) of `obj`; returns {sub-object id, arrow id}.
  std::pair<int, int> subobject_inclusion(int obj, const std::vector<int>& positions) const {
    const SymbolCtx& big = objects_[obj];
    std::vector<std::pair<std::string, Sort>> bindings;
    for (int p : positions) bindings.push_back(big.bindings()[p]);
    SymbolCtx sub = SymbolCtx::from(bindings);
    int sub_id = find_object(sub);
    assert(sub_id >= 0);
    return {sub_id, find_arrow(sub_id, obj, positions)};
  }

  std::string describe_object(int obj) const { return print_context(objects_[obj]); }

  std::string describe_arrow(int arrow) const {
    const Arrow& a = arrows_[arrow];
    std::string out = describe_object(a.src) + " -> " + describe_object(a.dst) + " [";
    const auto& src = objects_[a.src].bindings();
    const auto& dst = objects_[a.dst].bindings();
    for (std::size_t i = 0; i < a.img.size(); ++i) {
      if (i) out += ", ";
      out += src[i].first + "->" + dst[a.img[i]].first;
    }
    out += "]";
    return out;
  }

 private:
  TruncatedSite(std::vector<Sort> sorts, int interest_size, std::vector<std::string> pool)
      : sorts_(std::move(sorts)), interest_size_(interest_size), pool_(std::move(pool)) {
    build_objects();
    build_arrows();
  }

  void build_objects() {
    const int max_size = std::min<int>(interest_size_ + 1, static_cast<int>(pool_.size()));
    std::vector<int> subset;
    std::function<void(std::size_t)> pick_names = [&](std::size_t start) {
      // assign sorts to the chosen names
      std::vector<Sort> assign(subset.size());
      std::function<void(std::size_t)> pick_sorts = [&](std::size_t i) {
        if (i == subset.size()) {
          std::vector<std::pair<std::string, Sort>> bindings;
          for (std::size_t k = 0; k < subset.size(); ++k) {
            bindings.emplace_back(pool_[subset[k]], assign[k]);
          }
          SymbolCtx ctx = SymbolCtx::from(bindings);
          object_index_.emplace(bindings, static_cast<int>(objects_.size()));
          objects_.push_back(std::move(ctx));
          return;
        }
        for (const Sort& s : sorts_) {
          assign[i] = s;
          pick_sorts(i + 1);
        }
      };
      pick_sorts(0);
      if (static_cast<int>(subset.size()) == max_size) return;
      for (std::size_t n = start; n < pool_.size(); ++n) {
        subset.push_back(static_cast<int>(n));
        pick_names(n + 1);
        subset.pop_back();
      }
    };
    pick_names(0);
  }

  void build_arrows() {
    const int n = static_cast<int>(objects_.size());
    from_.resize(n);
    into_.resize(n);
    identities_.assign(n, -1);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const auto& src = objects_[a].bindings();
        const auto& dst = objects_[b].bindings();
        if (src.size() > dst.size()) continue;
        std::vector<int> img(src.size(), -1);
        std::vector<char> used(dst.size(), 0);
        std::function<void(std::size_t)> assign = [&](std::size_t i) {
          if (i == src.size()) {
            int id = static_cast<int>(arrows_.size());
            arrows_.push_back(Arrow{a, b, img});
            arrow_index_.emplace(std::make_tuple(a, b, img), id);
            from_[a].push_back(id);
            into_[b].push_back(id);
            bool is_id = (a == b);
            for (std::size_t k = 0; k < img.size() && is_id; ++k) is_id = img[k] == (int)k;
            if (is_id && a == b) identities_[a] = id;
            return;
          }
          for (std::size_t j = 0; j < dst.size(); ++j) {
            if (used[j] || !(dst[j].second == src[i].second)) continue;
            used[j] = 1;
            img[i] = static_cast<int>(j);
            assign(i + 1);
            used[j] = 0;
          }
        };
        assign(0);
      }
    }
  }

  std::vector<Sort> sorts_;
  int interest_size_;
  std::vector<std::string> pool_;
  std::vector<SymbolCtx> objects_;
  std::vector<Arrow> arrows_;
  std::map<std::vector<std::pair<std::string, Sort>>, int> object_index_;
  std::map<std::tuple<int, int, std::vector<int>>, int> arrow_index_;
  std::vector<std::vector<int>> from_;
  std::vector<std::vector<int>> into_;
  std::vector<int> identities_;
};

/// Explicit functor data on a truncated site: a finite fiber of labelled
/// elements per object and an action per arrow.
struct FinitePresheaf {
  const TruncatedSite* site = nullptr;
  std::vector<std::vector<std::string>> labels;  // per object
  std::vector<std::vector<int>> action;          // per arrow: fiber(src) -> fiber(dst)

  std::size_t fiber_size(int obj) const { return labels[obj].size(); }

  int apply(int arrow, int elem) const { return action[arrow][elem]; }

  bool is_functorial(std::string* why = nullptr) const {
    const auto& arrows = site->arrows();
    for (int obj = 0; obj < static_cast<int>(site->objects().size()); ++obj) {
      int id = site->identity(obj);
      for (std::size_t e = 0; e < fiber_size(obj); ++e) {
        if (apply(id, static_cast<int>(e)) != static_cast<int>(e)) {
          if (why) *why = "identity acts nontrivially at " + site->describe_object(obj);
          return false;
        }
      }
    }
    for (int f = 0; f < static_cast<int>(arrows.size()); ++f) {
      for (int g : site->arrows_from(arrows[f].dst)) {
        int c = site->compose(g, f);
        for (std::size_t e = 0; e < fiber_size(arrows[f].src); ++e) {
          if (apply(c, static_cast<int>(e)) != apply(g, apply(f, static_cast<int>(e)))) {
            if (why) {
              *why = "composition fails at " + site->describe_arrow(f) + " then " +
                     site->describe_arrow(g);
            }
            return false;
          }
        }
      }
    }
    return true;
  }
};

/// The terminal presheaf: a singleton fiber everywhere.
inline FinitePresheaf terminal_presheaf(const TruncatedSite& site) {
  FinitePresheaf X;
  X.site = &site;
  X.labels.assign(site.objects().size(), {"*"});
  X.action.assign(site.arrows().size(), {0});
  return X;
}

/// The presheaf of symbols of the given sort: the fiber over a context is
/// its set of symbols at that sort, acted on by renaming.
inline FinitePresheaf symbol_presheaf(const TruncatedSite& site, const Sort& sort) {
  FinitePresheaf X;
  X.site = &site;
  X.labels.resize(site.objects().size());
  std::vector<std::vector<int>> positions(site.objects().size());
  for (std::size_t o = 0; o < site.objects().size(); ++o) {
    const auto& bindings = site.objects()[o].bindings();
    for (std::size_t p = 0; p < bindings.size(); ++p) {
      if (bindings[p].second == sort) {
        positions[o].push_back(static_cast<int>(p));
        X.labels[o].push_back(bindings[p].first);
      }
    }
  }
  X.action.resize(site.arrows().size());
  for (std::size_t a = 0; a < site.arrows().size(); ++a) {
    const Arrow& arr = site.arrows()[a];
    for (int p : positions[arr.src]) {
      int image_pos = arr.img[p];
      const auto& dst_pos = positions[arr.dst];
      int idx = static_cast<int>(std::find(dst_pos.begin(), dst_pos.end(), image_pos) -
                                 dst_pos.begin());
      X.action[a].push_back(idx);
    }
  }
  return X;
}

inline FinitePresheaf product(const FinitePresheaf& X, const FinitePresheaf& Y) {
  const TruncatedSite& site = *X.site;
  FinitePresheaf P;
  P.site = &site;
  P.labels.resize(site.objects().size());
  for (std::size_t o = 0; o < site.objects().size(); ++o) {
    for (const std::string& x : X.labels[o]) {
      for (const std::string& y : Y.labels[o]) {
        P.labels[o].push_back("(" + x + "," + y + ")");
      }
    }
  }
  P.action.resize(site.arrows().size());
  for (std::size_t a = 0; a < site.arrows().size(); ++a) {
    const Arrow& arr = site.arrows()[a];
    const std::size_t ny_src = Y.fiber_size(arr.src);
    const std::size_t ny_dst = Y.fiber_size(arr.dst);
    (void)ny_dst;
    for (std::size_t x = 0; x < X.fiber_size(arr.src); ++x) {
      for (std::size_t y = 0; y < ny_src; ++y) {
        P.action[a].push_back(static_cast<int>(X.apply(static_cast<int>(a), static_cast<int>(x)) *
                                                   Y.fiber_size(arr.dst) +
                                               Y.apply(static_cast<int>(a), static_cast<int>(y))));
      }
    }
  }
  return P;
}

inline FinitePresheaf coproduct(const FinitePresheaf& X, const FinitePresheaf& Y) {
  const TruncatedSite& site = *X.site;
  FinitePresheaf C;
  C.site = &site;
  C.labels.resize(site.objects().size());
  for (std::size_t o = 0; o < site.objects().size(); ++o) {
    for (const std::string& x : X.labels[o]) C.labels[o].push_back("inl:" + x);
    for (const std::string& y : Y.labels[o]) C.labels[o].push_back("inr:" + y);
  }
  C.action.resize(site.arrows().size());
  for (std::size_t a = 0; a < site.arrows().size(); ++a) {
    const Arrow& arr = site.arrows()[a];
    for (std::size_t x = 0; x < X.fiber_size(arr.src); ++x) {
      C.action[a].push_back(X.apply(static_cast<int>(a), static_cast<int>(x)));
    }
    for (std::size_t y = 0; y < Y.fiber_size(arr.src); ++y) {
      C.action[a].push_back(static_cast<int>(X.fiber_size(arr.dst)) +
                            Y.apply(static_cast<int>(a), static_cast<int>(y)));
    }
  }
  return C;
}

// ---------------------------------------------------------------------------
// Support and the sheaf condition
// ---------------------------------------------------------------------------

/// Decides whether the source of `rho` supports element `m` of the fiber
/// over its destination: every parallel pair out of the destination that
/// equalizes `rho` must act identically on `m`. Exhaustive over the site.
inline bool supports(const FinitePresheaf& X, int rho, int m) {
  const TruncatedSite& site = *X.site;
  const Arrow& r = site.arrows()[rho];
  if (m < 0 || m >= static_cast<int>(X.fiber_size(r.dst))) {
    throw Error(ErrorCode::ElementNotInFiber,
                "element " + std::to_string(m) + " is not in the fiber over " +
                    site.describe_object(r.dst));
  }
  const std::vector<int>& out = site.arrows_from(r.dst);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Arrow& a1 = site.arrows()[out[i]];
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      const Arrow& a2 = site.arrows()[out[j]];
      if (a1.dst != a2.dst) continue;
      if (site.compose(out[i], rho) != site.compose(out[j], rho)) continue;
      if (X.apply(out[i], m) != X.apply(out[j], m)) return false;
    }
  }
  return true;
}

/// The smallest subcontext of `obj` whose inclusion supports `m`, computed
/// as the intersection of all supporting subcontexts. Only meaningful for
/// sheaves; if the intersection fails to support, NotASheaf is thrown.
inline int least_support(const FinitePresheaf& X, int obj, int m) {
  const TruncatedSite& site = *X.site;
  if (m < 0 || m >= static_cast<int>(X.fiber_size(obj))) {
    throw Error(ErrorCode::ElementNotInFiber,
                "element " + std::to_string(m) + " is not in the fiber over " +
                    site.describe_object(obj));
  }
  const int n = static_cast<int>(site.objects()[obj].bindings().size());
  std::vector<int> common;
  bool first = true;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> positions;
    for (int p = 0; p < n; ++p) {
      if (mask & (1 << p)) positions.push_back(p);
    }
    auto [sub, incl] = site.subobject_inclusion(obj, positions);
    if (!supports(X, incl, m)) continue;
    if (first) {
      common = positions;
      first = false;
    } else {
      std::vector<int> merged;
      std::set_intersection(common.begin(), common.end(), positions.begin(), positions.end(),
                            std::back_inserter(merged));
      common = std::move(merged);
    }
  }
  auto [sub, incl] = site.subobject_inclusion(obj, common);
  if (!supports(X, incl, m)) {
    throw Error(ErrorCode::NotASheaf,
                "the intersection of supporting subcontexts of " + site.describe_object(obj) +
                    " does not support element '" + X.labels[obj][m] + "'");
  }
  return sub;
}

struct CheckVerdict {
  bool ok = true;
  std::string witness;  // empty when ok

  explicit operator bool() const { return ok; }
};

/// The sheaf condition for the atomic coverage: every supported element has
/// exactly one strengthening. Finitely rendered in two parts. Uniqueness is
/// checked as injectivity of every restriction action (sheaves send the
/// site's monic arrows to injections), which is meaningful at every layer of
/// the truncation. Existence of strengthenings is checked for element homes
/// within the interest layer, where the spare layer supplies enough cocones
/// for the support quantification to be sound.
inline CheckVerdict is_sheaf(const FinitePresheaf& X) {
  const TruncatedSite& site = *X.site;
  for (int rho = 0; rho < static_cast<int>(site.arrows().size()); ++rho) {
    const Arrow& r = site.arrows()[rho];
    std::vector<char> seen(X.fiber_size(r.dst), 0);
    for (int m = 0; m < static_cast<int>(X.fiber_size(r.src)); ++m) {
      int n = X.apply(rho, m);
      if (seen[n]) {
        CheckVerdict v;
        v.ok = false;
        v.witness = "uniqueness fails: the action of " + site.describe_arrow(rho) +
                    " identifies two elements at '" + X.labels[r.dst][n] + "'";
        return v;
      }
      seen[n] = 1;
    }
  }
  for (int rho = 0; rho < static_cast<int>(site.arrows().size()); ++rho) {
    const Arrow& r = site.arrows()[rho];
    if (static_cast<int>(site.objects()[r.dst].bindings().size()) > site.interest_size()) {
      continue;
    }
    for (int n = 0; n < static_cast<int>(X.fiber_size(r.dst)); ++n) {
      if (!supports(X, rho, n)) continue;
      bool found = false;
      for (int m = 0; m < static_cast<int>(X.fiber_size(r.src)); ++m) {
        if (X.apply(rho, m) == n) found = true;
      }
      if (!found) {
        CheckVerdict v;
        v.ok = false;
        v.witness = "existence fails for element '" + X.labels[r.dst][n] +
                    "' supported along " + site.describe_arrow(rho);
        return v;
      }
    }
  }
  return CheckVerdict{};
}

/// Checks that the image of every pullback square decidable at this
/// truncation is a pullback square of finite sets. Squares whose cospan
/// target lies in the interest layer are checked in full. At the spare
/// layer the mono (self-pullback) squares are checked in full, and squares
/// with distinct legs are checked over the support-certified compatible
/// pairs: those whose amalgamation is already determined inside the
/// truncation. Uncertified crossing pairs at the spare layer compare data
/// the site cannot amalgamate (the mediating objects lie outside the
/// truncation), so no verdict about them is decidable here.
inline CheckVerdict preserves_pullbacks(const FinitePresheaf& X) {
  const TruncatedSite& site = *X.site;
  const int nobj = static_cast<int>(site.objects().size());
  for (int d = 0; d < nobj; ++d) {
    const bool interior =
        static_cast<int>(site.objects()[d].bindings().size()) <= site.interest_size();
    const std::vector<int>& legs = site.arrows_into(d);
    for (std::size_t i = 0; i < legs.size(); ++i) {
      for (std::size_t j = i; j < legs.size(); ++j) {
        const Arrow& si = site.arrows()[legs[i]];
        const Arrow& sj = site.arrows()[legs[j]];
        // The pullback of the cospan is the sub-object of d on the common
        // image, pulled back along the two legs.
        std::vector<int> common;
        std::vector<int> fi_img;
        std::vector<int> fj_img;
        for (std::size_t p = 0; p < si.img.size(); ++p) {
          for (std::size_t q = 0; q < sj.img.size(); ++q) {
            if (si.img[p] == sj.img[q]) {
              common.push_back(si.img[p]);
              fi_img.push_back(static_cast<int>(p));
              fj_img.push_back(static_cast<int>(q));
            }
          }
        }
        // Order the apex bindings ascending in d (the canonical sub-object).
        std::vector<std::size_t> order(common.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return common[a] < common[b]; });
        std::vector<int> positions;
        std::vector<int> fi_sorted;
        std::vector<int> fj_sorted;
        for (std::size_t k : order) {
          positions.push_back(common[k]);
          fi_sorted.push_back(fi_img[k]);
          fj_sorted.push_back(fj_img[k]);
        }
        auto [apex, incl] = site.subobject_inclusion(d, positions);
        (void)incl;
        int fi = site.find_arrow(apex, si.src, fi_sorted);
        int fj = site.find_arrow(apex, sj.src, fj_sorted);

        // The injectivity half: (m.fi, m.fj) must not identify apex elements.
        std::set<std::pair<int, int>> image;
        for (int m = 0; m < static_cast<int>(X.fiber_size(apex)); ++m) {
          if (!image.emplace(X.apply(fi, m), X.apply(fj, m)).second) {
            CheckVerdict v;
            v.ok = false;
            v.witness = "pullback of " + site.describe_arrow(legs[i]) + " and " +
                        site.describe_arrow(legs[j]) + " is not preserved (apex " +
                        site.describe_object(apex) + " maps non-injectively)";
            return v;
          }
        }
        // The surjectivity half over the decidable pairs.
        for (int mi = 0; mi < static_cast<int>(X.fiber_size(si.src)); ++mi) {
          for (int mj = 0; mj < static_cast<int>(X.fiber_size(sj.src)); ++mj) {
            if (X.apply(legs[i], mi) != X.apply(legs[j], mj)) continue;
            if (!interior && legs[i] != legs[j] &&
                !(supports(X, fi, mi) || supports(X, fj, mj))) {
              continue;  // amalgamation undecidable at this truncation
            }
            if (!image.count({mi, mj})) {
              CheckVerdict v;
              v.ok = false;
              v.witness = "pullback of " + site.describe_arrow(legs[i]) + " and " +
                          site.describe_arrow(legs[j]) + " is not preserved (no origin for a " +
                          "compatible pair at apex " + site.describe_object(apex) + ")";
              return v;
            }
          }
        }
      }
    }
  }
  return CheckVerdict{};
}

}  // namespace abt::sheaf
