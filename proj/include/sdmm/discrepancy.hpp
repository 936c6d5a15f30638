#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdmm {

enum class Norm { L1, L2 };

// Distance between two synopsis vectors of equal dimension.
inline double discrepancy(std::span<const double> a, std::span<const double> b,
                          Norm norm = Norm::L1) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("discrepancy: synopsis dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    double acc = 0.0;
    if (norm == Norm::L1) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// A pair's window is usable once it holds max(4, ceil(eta * capacity)) quanta
// and the eta-suffix of its current length reaches the three values trend
// analysis needs; shorter series are too brittle to rank on.
inline std::size_t min_warm_length(std::size_t capacity, double eta) {
    const auto scaled =
        static_cast<std::size_t>(std::ceil(eta * static_cast<double>(capacity)));
    auto need = std::max<std::size_t>(4, scaled);
    while (static_cast<std::size_t>(std::ceil(eta * static_cast<double>(need))) < 3) ++need;
    return need;
}

// Ring buffer of the most recent discrepancy quanta for one (local, peer) pair.
// Index 0 is the oldest retained quantum, size()-1 the newest.
class DiscrepancyWindow {
public:
    DiscrepancyWindow(std::size_t capacity, int local_node = 0, int peer_node = 0)
        : buf_(capacity), capacity_(capacity), local_(local_node), peer_(peer_node) {
        if (capacity == 0) throw std::invalid_argument("window capacity must be positive");
    }

    void push(double quantum) {
        if (!std::isfinite(quantum) || quantum < 0.0) {
            throw std::invalid_argument("discrepancy quantum must be finite and non-negative");
        }
        if (size_ < capacity_) {
            buf_[(head_ + size_) % capacity_] = quantum;
            ++size_;
        } else {
            buf_[head_] = quantum;
            head_ = (head_ + 1) % capacity_;
        }
    }

    double operator[](std::size_t i) const { return buf_[(head_ + i) % capacity_]; }
    double newest() const { return (*this)[size_ - 1]; }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return size_ == capacity_; }
    bool warm(double eta) const { return size_ >= min_warm_length(capacity_, eta); }

    int local_node() const { return local_; }
    int peer_node() const { return peer_; }

    // Chronological copy, oldest first.
    std::vector<double> values() const {
        std::vector<double> out(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = (*this)[i];
        return out;
    }

private:
    std::vector<double> buf_;
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    int local_;
    int peer_;
};

}  // namespace sdmm
