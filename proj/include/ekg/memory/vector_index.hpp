#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ekg/core/vec.hpp"

namespace ekg {

// Exact-cosine index: one entry per live graph node, full-scan search, no
// approximation. Dimension is fixed at creation and validated on every
// insert.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw std::invalid_argument("VectorIndex: dim must be > 0");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }

  void insert(const std::string& id, std::span<const double> v, std::uint64_t counter) {
    if (v.size() != dim_)
      throw std::invalid_argument("VectorIndex: dimension mismatch on insert");
    if (pos_.count(id)) throw std::invalid_argument("VectorIndex: duplicate id " + id);
    pos_[id] = ids_.size();
    ids_.push_back(id);
    counters_.push_back(counter);
    data_.insert(data_.end(), v.begin(), v.end());
  }

  void erase(const std::string& id) {
    const auto it = pos_.find(id);
    if (it == pos_.end()) return;
    const std::size_t i = it->second;
    const std::size_t last = ids_.size() - 1;
    if (i != last) {
      ids_[i] = ids_[last];
      counters_[i] = counters_[last];
      std::copy_n(data_.begin() + static_cast<long>(last * dim_), dim_,
                  data_.begin() + static_cast<long>(i * dim_));
      pos_[ids_[i]] = i;
    }
    ids_.pop_back();
    counters_.pop_back();
    data_.resize(ids_.size() * dim_);
    pos_.erase(it);
  }

  struct Hit {
    std::string id;
    double sim;
    std::uint64_t counter;
  };

  // All entries scored against the query (unit vectors: similarity = dot).
  std::vector<Hit> scan(std::span<const double> q) const {
    if (q.size() != dim_)
      throw std::invalid_argument("VectorIndex: query dimension mismatch");
    std::vector<Hit> hits;
    hits.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      double s = 0.0;
      const double* row = data_.data() + i * dim_;
      for (std::size_t d = 0; d < dim_; ++d) s += row[d] * q[d];
      hits.push_back({ids_[i], s, counters_[i]});
    }
    return hits;
  }

  // Exact top-k by similarity; ties broken by smaller insertion counter.
  std::vector<std::pair<std::string, double>> search(std::span<const double> q,
                                                     std::size_t k) const {
    auto hits = scan(q);
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return a.counter < b.counter;
    });
    if (k < hits.size()) hits.resize(k);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(hits.size());
    for (auto& h : hits) out.emplace_back(std::move(h.id), h.sim);
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<std::uint64_t> counters_;
  std::vector<double> data_;  // row-major, ids_.size() x dim_
  std::unordered_map<std::string, std::size_t> pos_;
};

}  // namespace ekg
