#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <limits>
#include <list>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cachenet/workload.hpp"

namespace cachenet {

enum class Verdict { Forward, StoreUnprivileged, Promote };

struct AdmissionDecision {
  Verdict verdict{Verdict::Forward};
  int sub_partition{-1};             // target privileged sub-partition (Promote)
  std::optional<ContentId> demoted;  // LRU-least pushed into unprivileged
  std::optional<ContentId> evicted;  // item removed from the cache
};

// Administrator-defined replication priority. Named functions compose as a
// left-to-right chain of multiplicative factors.
class PriorityFunction {
 public:
  enum class Kind { Neutral, SizeRate, RateSize };

  static PriorityFunction neutral() { return PriorityFunction({Kind::Neutral}, 1.0); }
  // (|c_i| / |n_j|) * (sum N_ALFU / tau_hat)
  static PriorityFunction size_rate(double content_size = 1.0) {
    return PriorityFunction({Kind::SizeRate}, content_size);
  }
  // Variant with tau_hat in the numerator: (|c_i| / |n_j|) * (tau_hat / sum N_ALFU)
  static PriorityFunction rate_size(double content_size = 1.0) {
    return PriorityFunction({Kind::RateSize}, content_size);
  }
  static PriorityFunction composed(std::vector<Kind> chain, double content_size = 1.0) {
    return PriorityFunction(std::move(chain), content_size);
  }

  double evaluate(double cache_capacity, double sum_alfu, double tau_hat) const {
    double value = 1.0;
    for (Kind k : chain_) {
      switch (k) {
        case Kind::Neutral:
          break;
        case Kind::SizeRate:
          if (sum_alfu == 0.0) return 0.0;
          if (tau_hat == 0.0) throw std::domain_error("size-rate priority needs tau_hat > 0");
          value *= (content_size_ / cache_capacity) * (sum_alfu / tau_hat);
          break;
        case Kind::RateSize:
          if (sum_alfu == 0.0) return 0.0;
          value *= (content_size_ / cache_capacity) * (tau_hat / sum_alfu);
          break;
      }
    }
    return value;
  }

  bool is_neutral() const {
    return std::all_of(chain_.begin(), chain_.end(),
                       [](Kind k) { return k == Kind::Neutral; });
  }

 private:
  PriorityFunction(std::vector<Kind> chain, double content_size)
      : chain_(std::move(chain)), content_size_(content_size) {}
  std::vector<Kind> chain_;
  double content_size_;
};

// Uniform policy surface driven by the simulator: a request probe on the
// forward path and an admission decision on the reverse (content) path.
class CachePolicy {
 public:
  virtual ~CachePolicy() = default;
  virtual bool on_request(ContentId id, double now) = 0;  // true = hit
  virtual AdmissionDecision admit(ContentId id, double now) = 0;
  virtual bool contains(ContentId id) const = 0;
  virtual std::size_t size() const = 0;
  virtual std::string name() const = 0;
};

// LFRU cache: an ALFU-managed unprivileged partition plus K LRU-managed
// privileged sub-partitions, all counters scoped to a tumbling time window
// of length W_T. K = 0 yields a pure ALFU cache. W_T <= 0 disables the
// window reset (unbounded counters).
class LfruCache final : public CachePolicy {
 public:
  LfruCache(std::size_t capacity, double unprivileged_fraction, int k_partitions,
            double window_time,
            PriorityFunction priority = PriorityFunction::neutral())
      : capacity_(capacity),
        k_(k_partitions),
        w_t_(window_time),
        priority_(std::move(priority)) {
    if (unprivileged_fraction < 0.0 || unprivileged_fraction > 1.0)
      throw std::invalid_argument("unprivileged_fraction must be in [0,1]");
    if (k_partitions < 0) throw std::invalid_argument("k_partitions must be >= 0");
    unpriv_cap_ = (k_ == 0)
                      ? capacity_
                      : static_cast<std::size_t>(
                            std::floor(unprivileged_fraction * static_cast<double>(capacity_)));
    std::size_t priv_total = capacity_ - unpriv_cap_;
    if (k_ > 0) {
      parts_.resize(static_cast<std::size_t>(k_));
      std::size_t base = priv_total / static_cast<std::size_t>(k_);
      std::size_t extra = priv_total % static_cast<std::size_t>(k_);
      for (int k = 0; k < k_; ++k)
        parts_[static_cast<std::size_t>(k)].cap = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
    }
  }

  bool on_request(ContentId id, double now) override {
    advance_window(now);
    ++touch_seq_;
    if (auto it = unpriv_index_.find(id); it != unpriv_index_.end()) {
      auto& e = unpriv_[it->second];
      ++e.counter;
      e.touch = touch_seq_;
      return true;
    }
    if (auto it = priv_index_.find(id); it != priv_index_.end()) {
      auto& part = parts_[static_cast<std::size_t>(it->second.part)];
      part.lru.splice(part.lru.begin(), part.lru, it->second.pos);
      ++part.hits;
      return true;
    }
    ++n_ur_[id];
    return false;
  }

  AdmissionDecision admit(ContentId id, double now) override {
    advance_window(now);
    long tau = 1;
    if (auto it = n_ur_.find(id); it != n_ur_.end()) {
      tau = std::max<long>(1, it->second);
    }
    return lfru_admit(id, tau);
  }

  // Three-branch CLCE/LFRU admission with an explicit demand estimate.
  // Pending-request state for `id` is cleared on both store and forward.
  AdmissionDecision lfru_admit(ContentId id, long tau_hat) {
    n_ur_.erase(id);
    if (contains(id)) return {Verdict::Forward, -1, {}, {}};
    ++touch_seq_;
    if (capacity_ == 0) return {Verdict::Forward, -1, {}, {}};

    // Cold-start fill: store without eviction until the cache is full.
    if (unpriv_.size() < unpriv_cap_) {
      store_unprivileged(id, tau_hat);
      return {Verdict::StoreUnprivileged, -1, {}, {}};
    }
    if (std::optional<int> k = next_fill_partition()) {
      insert_privileged(*k, id);
      return {Verdict::Promote, *k, {}, {}};
    }

    if (unpriv_cap_ == 0) {
      // Degenerate geometry with no ALFU partition: route everything through
      // the privileged side, evicting the demoted item outright.
      if (k_ == 0 || priv_capacity() == 0) return {Verdict::Forward, -1, {}, {}};
      int k = closest_partition(tau_hat);
      ContentId demoted = parts_[static_cast<std::size_t>(k)].lru.back();
      erase_privileged(demoted);
      insert_privileged(k, id);
      return {Verdict::Promote, k, demoted, demoted};
    }

    long mn = std::numeric_limits<long>::max();
    long mx = std::numeric_limits<long>::min();
    for (const auto& e : unpriv_) {
      mn = std::min(mn, e.counter);
      mx = std::max(mx, e.counter);
    }

    if (tau_hat < mn) return {Verdict::Forward, -1, {}, {}};
    if (!priority_.is_neutral()) {
      std::size_t vi = victim_index();
      double sum = sum_alfu();
      double p_new = priority_.evaluate(static_cast<double>(capacity_), sum,
                                        static_cast<double>(tau_hat));
      double victim_tau = static_cast<double>(std::max<long>(1, unpriv_[vi].counter));
      double p_victim =
          priority_.evaluate(static_cast<double>(capacity_), sum, victim_tau);
      if (p_new < p_victim) return {Verdict::Forward, -1, {}, {}};
    }

    if (tau_hat <= mx || k_ == 0 || priv_capacity() == 0) {
      ContentId evicted = evict_unprivileged_min();
      store_unprivileged(id, tau_hat);
      return {Verdict::StoreUnprivileged, -1, {}, evicted};
    }

    // tau_hat > max(N_ALFU): promote into the sub-partition whose hit count
    // is closest to the observed demand.
    int k = closest_partition(tau_hat);
    ContentId demoted = parts_[static_cast<std::size_t>(k)].lru.back();
    erase_privileged(demoted);
    ContentId evicted = evict_unprivileged_min();
    store_unprivileged(demoted, mn + 1);
    insert_privileged(k, id);
    return {Verdict::Promote, k, demoted, evicted};
  }

  // Tumbling window: once now - window_start crosses W_T all counters reset
  // and the window realigns to the most recent boundary.
  void advance_window(double now) {
    if (w_t_ <= 0.0) return;
    if (now - window_start_ >= w_t_) {
      double k = std::floor((now - window_start_) / w_t_);
      window_start_ += k * w_t_;
      for (auto& e : unpriv_) e.counter = 0;
      for (auto& p : parts_) p.hits = 0;
      n_ur_.clear();
    }
  }

  bool contains(ContentId id) const override {
    return unpriv_index_.count(id) > 0 || priv_index_.count(id) > 0;
  }
  std::size_t size() const override { return unpriv_.size() + priv_size_; }
  std::string name() const override { return k_ == 0 ? "alfu" : "lfru"; }

  long n_ur(ContentId id) const {
    auto it = n_ur_.find(id);
    return it == n_ur_.end() ? 0 : it->second;
  }
  long unprivileged_counter(ContentId id) const {
    auto it = unpriv_index_.find(id);
    if (it == unpriv_index_.end()) throw std::domain_error("not in unprivileged partition");
    return unpriv_[it->second].counter;
  }
  long partition_hits(int k) const { return parts_.at(static_cast<std::size_t>(k)).hits; }
  double window_start() const { return window_start_; }
  std::size_t unprivileged_capacity() const { return unpriv_cap_; }
  int partitions() const { return k_; }

  // Partition layout and counters with stable key order, for golden tests.
  nlohmann::ordered_json dump_json() const {
    nlohmann::ordered_json j;
    j["capacity"] = capacity_;
    j["window_start"] = window_start_;
    nlohmann::ordered_json up = nlohmann::ordered_json::array();
    std::vector<std::size_t> order(unpriv_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return unpriv_[a].id < unpriv_[b].id;
    });
    for (std::size_t i : order) {
      up.push_back({{"content", unpriv_[i].id}, {"counter", unpriv_[i].counter}});
    }
    j["unprivileged"] = std::move(up);
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (const auto& p : parts_) {
      nlohmann::ordered_json pj;
      pj["hits"] = p.hits;
      pj["mru_to_lru"] = std::vector<ContentId>(p.lru.begin(), p.lru.end());
      ps.push_back(std::move(pj));
    }
    j["privileged"] = std::move(ps);
    nlohmann::ordered_json ur = nlohmann::ordered_json::object();
    std::vector<std::pair<ContentId, long>> pend(n_ur_.begin(), n_ur_.end());
    std::sort(pend.begin(), pend.end());
    for (const auto& [id, c] : pend) ur[std::to_string(id)] = c;
    j["unresponded"] = std::move(ur);
    return j;
  }

  // Structural invariants; cheap enough to run after every event in tests.
  void validate() const {
    assert(unpriv_.size() <= unpriv_cap_);
    std::size_t priv = 0;
    for (const auto& p : parts_) {
      assert(p.lru.size() <= p.cap);
      assert(p.hits >= 0);
      priv += p.lru.size();
    }
    assert(priv == priv_size_);
    assert(unpriv_.size() + priv <= capacity_);
    for (const auto& e : unpriv_) {
      assert(e.counter >= 0);
      assert(priv_index_.count(e.id) == 0);
    }
    for (const auto& [id, c] : n_ur_) {
      assert(c >= 0);
      assert(!contains(id));
    }
  }

 private:
  struct UnprivEntry {
    ContentId id;
    long counter;
    std::uint64_t touch;
  };
  struct SubPartition {
    std::list<ContentId> lru;  // front = MRU
    long hits{0};
    std::size_t cap{0};
  };
  struct PrivRef {
    int part;
    std::list<ContentId>::iterator pos;
  };

  std::size_t priv_capacity() const {
    std::size_t c = 0;
    for (const auto& p : parts_) c += p.cap;
    return c;
  }

  std::optional<int> next_fill_partition() {
    if (k_ == 0) return std::nullopt;
    for (int i = 0; i < k_; ++i) {
      int k = (fill_cursor_ + i) % k_;
      auto& p = parts_[static_cast<std::size_t>(k)];
      if (p.lru.size() < p.cap) {
        fill_cursor_ = (k + 1) % k_;
        return k;
      }
    }
    return std::nullopt;
  }

  double sum_alfu() const {
    double s = 0.0;
    for (const auto& e : unpriv_) s += static_cast<double>(e.counter);
    return s;
  }

  // argmin over counters; ties broken least-recently-used, then lowest id.
  std::size_t victim_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < unpriv_.size(); ++i) {
      const auto& a = unpriv_[i];
      const auto& b = unpriv_[best];
      if (a.counter < b.counter ||
          (a.counter == b.counter &&
           (a.touch < b.touch || (a.touch == b.touch && a.id < b.id))))
        best = i;
    }
    return best;
  }

  ContentId evict_unprivileged_min() {
    std::size_t vi = victim_index();
    ContentId victim = unpriv_[vi].id;
    unpriv_index_.erase(victim);
    unpriv_[vi] = unpriv_.back();
    unpriv_.pop_back();
    if (vi < unpriv_.size()) unpriv_index_[unpriv_[vi].id] = vi;
    return victim;
  }

  void store_unprivileged(ContentId id, long counter) {
    unpriv_.push_back({id, counter, touch_seq_});
    unpriv_index_[id] = unpriv_.size() - 1;
  }

  int closest_partition(long tau_hat) const {
    int best = -1;
    long best_eps = 0;
    for (int k = 0; k < k_; ++k) {
      const auto& p = parts_[static_cast<std::size_t>(k)];
      if (p.cap == 0) continue;
      long eps = std::abs(p.hits - tau_hat);
      if (best < 0 || eps < best_eps) {
        best = k;
        best_eps = eps;
      }
    }
    if (best < 0) throw std::logic_error("no usable privileged sub-partition");
    return best;
  }

  void insert_privileged(int k, ContentId id) {
    auto& p = parts_[static_cast<std::size_t>(k)];
    p.lru.push_front(id);
    priv_index_[id] = {k, p.lru.begin()};
    ++priv_size_;
  }

  void erase_privileged(ContentId id) {
    auto it = priv_index_.find(id);
    parts_[static_cast<std::size_t>(it->second.part)].lru.erase(it->second.pos);
    priv_index_.erase(it);
    --priv_size_;
  }

  std::size_t capacity_;
  int k_;
  double w_t_;
  PriorityFunction priority_;
  std::size_t unpriv_cap_{0};
  std::vector<UnprivEntry> unpriv_;
  std::unordered_map<ContentId, std::size_t> unpriv_index_;
  std::vector<SubPartition> parts_;
  std::unordered_map<ContentId, PrivRef> priv_index_;
  std::size_t priv_size_{0};
  std::unordered_map<ContentId, long> n_ur_;
  double window_start_{0.0};
  std::uint64_t touch_seq_{0};
  int fill_cursor_{0};
};

// Unpartitioned LRU with unconditional (LCE) admission.
class LruCache final : public CachePolicy {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

  bool on_request(ContentId id, double) override {
    auto it = index_.find(id);
    if (it == index_.end()) return false;
    lru_.splice(lru_.begin(), lru_, it->second);
    return true;
  }

  AdmissionDecision admit(ContentId id, double) override {
    if (capacity_ == 0 || contains(id)) return {Verdict::Forward, -1, {}, {}};
    std::optional<ContentId> evicted;
    if (lru_.size() >= capacity_) {
      evicted = lru_.back();
      index_.erase(lru_.back());
      lru_.pop_back();
    }
    lru_.push_front(id);
    index_[id] = lru_.begin();
    return {Verdict::StoreUnprivileged, -1, {}, evicted};
  }

  bool contains(ContentId id) const override { return index_.count(id) > 0; }
  std::size_t size() const override { return lru_.size(); }
  std::string name() const override { return "lru"; }

 private:
  std::size_t capacity_;
  std::list<ContentId> lru_;
  std::unordered_map<ContentId, std::list<ContentId>::iterator> index_;
};

// LFU over the full (unbounded) request history.
class LfuCache final : public CachePolicy {
 public:
  explicit LfuCache(std::size_t capacity) : capacity_(capacity) {}

  bool on_request(ContentId id, double) override {
    ++seq_;
    ++freq_[id];
    auto it = stored_.find(id);
    if (it == stored_.end()) return false;
    it->second = seq_;
    return true;
  }

  AdmissionDecision admit(ContentId id, double) override {
    if (capacity_ == 0 || contains(id)) return {Verdict::Forward, -1, {}, {}};
    std::optional<ContentId> evicted;
    if (stored_.size() >= capacity_) {
      evicted = least_frequent();
      stored_.erase(*evicted);
    }
    ++seq_;
    stored_[id] = seq_;
    return {Verdict::StoreUnprivileged, -1, {}, evicted};
  }

  bool contains(ContentId id) const override { return stored_.count(id) > 0; }
  std::size_t size() const override { return stored_.size(); }
  std::string name() const override { return "lfu"; }
  long frequency(ContentId id) const {
    auto it = freq_.find(id);
    return it == freq_.end() ? 0 : it->second;
  }

 private:
  ContentId least_frequent() const {
    ContentId best = 0;
    long best_f = 0;
    std::uint64_t best_touch = 0;
    bool first = true;
    for (const auto& [id, touch] : stored_) {
      long f = frequency(id);
      if (first || f < best_f || (f == best_f && touch < best_touch) ||
          (f == best_f && touch == best_touch && id < best)) {
        best = id;
        best_f = f;
        best_touch = touch;
        first = false;
      }
    }
    return best;
  }

  std::size_t capacity_;
  std::unordered_map<ContentId, long> freq_;
  std::unordered_map<ContentId, std::uint64_t> stored_;  // id -> last touch
  std::uint64_t seq_{0};
};

// LFU over the last `window` requests (sliding, request-count based).
class WlfuCache final : public CachePolicy {
 public:
  WlfuCache(std::size_t capacity, std::int64_t window)
      : capacity_(capacity), window_(window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
  }

  bool on_request(ContentId id, double) override {
    ++seq_;
    history_.push_back(id);
    ++freq_[id];
    if (static_cast<std::int64_t>(history_.size()) > window_) {
      ContentId old = history_.front();
      history_.pop_front();
      if (--freq_[old] == 0) freq_.erase(old);
    }
    auto it = stored_.find(id);
    if (it == stored_.end()) return false;
    it->second = seq_;
    return true;
  }

  AdmissionDecision admit(ContentId id, double) override {
    if (capacity_ == 0 || contains(id)) return {Verdict::Forward, -1, {}, {}};
    std::optional<ContentId> evicted;
    if (stored_.size() >= capacity_) {
      evicted = least_frequent();
      stored_.erase(*evicted);
    }
    ++seq_;
    stored_[id] = seq_;
    return {Verdict::StoreUnprivileged, -1, {}, evicted};
  }

  bool contains(ContentId id) const override { return stored_.count(id) > 0; }
  std::size_t size() const override { return stored_.size(); }
  std::string name() const override { return "wlfu"; }
  std::int64_t window() const { return window_; }

 private:
  long windowed_frequency(ContentId id) const {
    auto it = freq_.find(id);
    return it == freq_.end() ? 0 : it->second;
  }

  ContentId least_frequent() const {
    ContentId best = 0;
    long best_f = 0;
    std::uint64_t best_touch = 0;
    bool first = true;
    for (const auto& [id, touch] : stored_) {
      long f = windowed_frequency(id);
      if (first || f < best_f || (f == best_f && touch < best_touch) ||
          (f == best_f && touch == best_touch && id < best)) {
        best = id;
        best_f = f;
        best_touch = touch;
        first = false;
      }
    }
    return best;
  }

  std::size_t capacity_;
  std::int64_t window_;
  std::deque<ContentId> history_;
  std::unordered_map<ContentId, long> freq_;
  std::unordered_map<ContentId, std::uint64_t> stored_;
  std::uint64_t seq_{0};
};

// Uniform random eviction with a seeded generator.
class RandomCache final : public CachePolicy {
 public:
  RandomCache(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), gen_(seed) {}

  bool on_request(ContentId id, double) override { return contains(id); }

  AdmissionDecision admit(ContentId id, double) override {
    if (capacity_ == 0 || contains(id)) return {Verdict::Forward, -1, {}, {}};
    std::optional<ContentId> evicted;
    if (items_.size() >= capacity_) {
      std::size_t vi = static_cast<std::size_t>(
          uniform01(gen_) * static_cast<double>(items_.size()));
      if (vi >= items_.size()) vi = items_.size() - 1;
      evicted = items_[vi];
      index_.erase(items_[vi]);
      items_[vi] = items_.back();
      items_.pop_back();
      if (vi < items_.size()) index_[items_[vi]] = vi;
    }
    items_.push_back(id);
    index_[id] = items_.size() - 1;
    return {Verdict::StoreUnprivileged, -1, {}, evicted};
  }

  bool contains(ContentId id) const override { return index_.count(id) > 0; }
  std::size_t size() const override { return items_.size(); }
  std::string name() const override { return "random"; }

 private:
  std::size_t capacity_;
  std::mt19937_64 gen_;
  std::vector<ContentId> items_;
  std::unordered_map<ContentId, std::size_t> index_;
};

}  // namespace cachenet
