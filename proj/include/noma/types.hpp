#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace noma {

using cplx = std::complex<double>;

/// Raised when two arrays that must describe the same network disagree in shape.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad scenario parameters (including topology resampling that never succeeds).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem sizes: BSs, users, subcarriers, antennas per BS.
struct Dims {
    std::size_t bs = 0;
    std::size_t users = 0;
    std::size_t carriers = 0;
    std::size_t antennas = 0;

    std::size_t links() const { return bs * users * carriers; }
    bool operator==(const Dims&) const = default;
};

struct LinkId {
    std::size_t bs = 0;
    std::size_t user = 0;
    std::size_t carrier = 0;

    bool operator==(const LinkId&) const = default;
};

/// Dense [M][K][S] array, row-major.
template <class T>
class LinkArray {
public:
    LinkArray() = default;
    LinkArray(const Dims& dims, T fill = T{})
        : bs_(dims.bs), users_(dims.users), carriers_(dims.carriers),
          data_(dims.links(), fill) {}

    T& operator()(std::size_t m, std::size_t k, std::size_t s) { return data_[index(m, k, s)]; }
    const T& operator()(std::size_t m, std::size_t k, std::size_t s) const { return data_[index(m, k, s)]; }
    T& operator[](const LinkId& l) { return (*this)(l.bs, l.user, l.carrier); }
    const T& operator[](const LinkId& l) const { return (*this)(l.bs, l.user, l.carrier); }

    std::size_t bs() const { return bs_; }
    std::size_t users() const { return users_; }
    std::size_t carriers() const { return carriers_; }
    std::size_t size() const { return data_.size(); }

    std::vector<T>& flat() { return data_; }
    const std::vector<T>& flat() const { return data_; }

    bool same_shape(const Dims& d) const {
        return bs_ == d.bs && users_ == d.users && carriers_ == d.carriers;
    }
    bool operator==(const LinkArray&) const = default;

private:
    std::size_t index(std::size_t m, std::size_t k, std::size_t s) const {
        return (m * users_ + k) * carriers_ + s;
    }

    std::size_t bs_ = 0, users_ = 0, carriers_ = 0;
    std::vector<T> data_;
};

/// Dense [M][K][S][N] complex array; each (m,k,s) entry is a length-N vector.
class VectorArray {
public:
    VectorArray() = default;
    explicit VectorArray(const Dims& dims)
        : dims_(dims), data_(dims.links() * dims.antennas, cplx{0.0, 0.0}) {}

    std::span<cplx> operator()(std::size_t m, std::size_t k, std::size_t s) {
        return {data_.data() + offset(m, k, s), dims_.antennas};
    }
    std::span<const cplx> operator()(std::size_t m, std::size_t k, std::size_t s) const {
        return {data_.data() + offset(m, k, s), dims_.antennas};
    }
    std::span<cplx> operator[](const LinkId& l) { return (*this)(l.bs, l.user, l.carrier); }
    std::span<const cplx> operator[](const LinkId& l) const { return (*this)(l.bs, l.user, l.carrier); }

    const Dims& dims() const { return dims_; }
    std::vector<cplx>& flat() { return data_; }
    const std::vector<cplx>& flat() const { return data_; }
    bool operator==(const VectorArray&) const = default;

private:
    std::size_t offset(std::size_t m, std::size_t k, std::size_t s) const {
        return ((m * dims_.users + k) * dims_.carriers + s) * dims_.antennas;
    }

    Dims dims_;
    std::vector<cplx> data_;
};

/// h^H w
inline cplx inner(std::span<const cplx> h, std::span<const cplx> w) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < h.size(); ++i) acc += std::conj(h[i]) * w[i];
    return acc;
}

inline double norm_sq(std::span<const cplx> v) {
    double acc = 0.0;
    for (const auto& x : v) acc += std::norm(x);
    return acc;
}

} // namespace noma
