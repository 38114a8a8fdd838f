#pragma once

// Literal two-queue LRU over std::vector, for cross-checking LruLists and
// shrink_node on small instances.

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

class RefLru {
 public:
  struct Page {
    bool dirty = false;
    bool referenced = false;
  };

  struct Result {
    std::vector<std::uint32_t> evicted;  // in eviction order
    std::int64_t written_back = 0;
  };

  void insert(std::uint32_t f, bool dirty) {
    pages_[f] = Page{dirty, false};
    inactive_.push_back(f);
  }

  void remove(std::uint32_t f) {
    erase(inactive_, f);
    erase(active_, f);
    pages_.erase(f);
  }

  void touch(std::uint32_t f) {
    Page& p = pages_.at(f);
    if (contains(inactive_, f) && p.referenced) {
      erase(inactive_, f);
      active_.push_back(f);
    }
    p.referenced = true;
  }

  /// Pass rules written out longhand: the inactive queue is usable when it
  /// holds a clean page, or a dirty page and budget remains.
  Result shrink(std::int64_t target, std::int64_t budget) {
    Result r;
    while (static_cast<std::int64_t>(r.evicted.size()) < target) {
      bool any_clean = false;
      for (auto f : inactive_) any_clean = any_clean || !pages_.at(f).dirty;
      const bool usable = !inactive_.empty() && (any_clean || budget > 0);
      if (!usable) {
        if (active_.empty()) break;
        const auto f = active_.front();
        active_.erase(active_.begin());
        pages_.at(f).referenced = false;
        inactive_.push_back(f);
        continue;
      }
      const auto f = inactive_.front();
      inactive_.erase(inactive_.begin());
      Page& p = pages_.at(f);
      if (!p.dirty) {
        r.evicted.push_back(f);
        pages_.erase(f);
      } else if (budget > 0) {
        p.dirty = false;
        --budget;
        ++r.written_back;
        inactive_.push_back(f);
      } else {
        inactive_.push_back(f);
      }
    }
    return r;
  }

  const std::vector<std::uint32_t>& inactive() const { return inactive_; }
  const std::vector<std::uint32_t>& active() const { return active_; }
  bool dirty(std::uint32_t f) const { return pages_.at(f).dirty; }
  bool referenced(std::uint32_t f) const { return pages_.at(f).referenced; }
  bool queued(std::uint32_t f) const { return pages_.count(f) != 0; }

 private:
  static bool contains(const std::vector<std::uint32_t>& v, std::uint32_t f) {
    return std::find(v.begin(), v.end(), f) != v.end();
  }
  static void erase(std::vector<std::uint32_t>& v, std::uint32_t f) {
    v.erase(std::remove(v.begin(), v.end(), f), v.end());
  }

  std::vector<std::uint32_t> inactive_;
  std::vector<std::uint32_t> active_;
  std::map<std::uint32_t, Page> pages_;
};

}  // namespace oracle
