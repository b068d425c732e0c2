#pragma once

#include <cassert>
#include <cstdint>
#include <utility>
#include <vector>

namespace sceneflow {

// Dense row-major raster. Pixel (x, y) = (column, row), centers at integer
// coordinates.
template <typename T>
class Grid {
  public:
    Grid() = default;
    Grid(int width, int height, const T& fill = T{})
        : width_(width), height_(height),
          data_(static_cast<size_t>(width) * static_cast<size_t>(height), fill) {
        assert(width >= 0 && height >= 0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    T& operator()(int x, int y) {
        assert(in_bounds(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }
    const T& operator()(int x, int y) const {
        assert(in_bounds(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool same_size(int w, int h) const { return width_ == w && height_ == h; }
    template <typename U>
    bool same_size(const Grid<U>& other) const {
        return same_size(other.width(), other.height());
    }

    void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

}  // namespace sceneflow
