#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sciu {

// Fixed-capacity window over the most recent values. Iteration via at(i) runs
// oldest → newest. `recorded()` counts pushes since construction or clear(),
// including evicted ones.
template <typename T>
class RingWindow {
public:
    explicit RingWindow(std::size_t capacity = 1) : slots_(capacity) {
        if (capacity == 0) throw std::invalid_argument("RingWindow capacity must be positive");
    }

    void push(const T& value) {
        slots_[head_] = value;
        head_ = (head_ + 1) % slots_.size();
        if (size_ < slots_.size()) ++size_;
        ++recorded_;
    }

    void clear() {
        head_ = 0;
        size_ = 0;
        recorded_ = 0;
    }

    std::size_t capacity() const { return slots_.size(); }
    std::size_t size() const { return size_; }
    std::size_t recorded() const { return recorded_; }
    bool full() const { return size_ == slots_.size(); }

    const T& at(std::size_t i) const {
        if (i >= size_) throw std::out_of_range("RingWindow index");
        const std::size_t oldest = (head_ + slots_.size() - size_) % slots_.size();
        return slots_[(oldest + i) % slots_.size()];
    }

    const T& newest() const { return at(size_ - 1); }

    std::vector<T> values() const {
        std::vector<T> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) out.push_back(at(i));
        return out;
    }

private:
    std::vector<T> slots_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::size_t recorded_ = 0;
};

}  // namespace sciu
