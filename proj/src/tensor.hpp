#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gait {

enum class ErrorCode : int {
  Internal = 1,
  Data = 2,
  Prerequisite = 3,
  Protocol = 4,
  Checkpoint = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error(ErrorCode::Internal, msg) {}
};
struct EmptySilhouette : Error {
  explicit EmptySilhouette(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};
struct MissingFrames : Error {
  explicit MissingFrames(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};
struct EmptySequence : Error {
  explicit EmptySequence(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};
struct InvalidBinCount : Error {
  explicit InvalidBinCount(const std::string& msg) : Error(ErrorCode::Internal, msg) {}
};
struct DegenerateBatch : Error {
  explicit DegenerateBatch(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};
struct ZeroVector : Error {
  explicit ZeroVector(const std::string& msg) : Error(ErrorCode::Internal, msg) {}
};
struct EmptyGalleryView : Error {
  explicit EmptyGalleryView(const std::string& msg) : Error(ErrorCode::Protocol, msg) {}
};
struct CheckpointError : Error {
  explicit CheckpointError(const std::string& msg) : Error(ErrorCode::Checkpoint, msg) {}
};
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};

inline int numel(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

/// Dense row-major N-dimensional array of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0)
      : shape(std::move(s)), data(static_cast<size_t>(numel(shape)), fill) {
    for (int d : shape) {
      if (d <= 0) throw ShapeMismatch("tensor extents must be positive");
    }
  }

  static Tensor scalar(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
  }
  static Tensor vec(std::vector<double> v) {
    Tensor t;
    t.shape = {static_cast<int>(v.size())};
    t.data = std::move(v);
    return t;
  }

  int size() const { return static_cast<int>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  double& operator[](int i) { return data[static_cast<size_t>(i)]; }
  double operator[](int i) const { return data[static_cast<size_t>(i)]; }

  // [H,W,C] accessors
  double& at3(int y, int x, int c) {
    return data[static_cast<size_t>((y * shape[1] + x) * shape[2] + c)];
  }
  double at3(int y, int x, int c) const {
    return data[static_cast<size_t>((y * shape[1] + x) * shape[2] + c)];
  }
  // [R,C] accessors
  double& at2(int r, int c) { return data[static_cast<size_t>(r * shape[1] + c)]; }
  double at2(int r, int c) const { return data[static_cast<size_t>(r * shape[1] + c)]; }
};

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace gait
