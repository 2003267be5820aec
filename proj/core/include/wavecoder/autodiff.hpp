#pragma once

// Reverse-mode automatic differentiation over real and complex tensors.
//
// Complex adjoints follow the Wirtinger convention for real-valued losses:
// the adjoint stored for a complex value z is dL/dRe(z) + j dL/dIm(z). With
// it, a linear map y = A z back-propagates as A^H applied to the adjoint of
// y, and a real parameter p feeding z receives Re(conj(adj_z) * dz/dp).

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wavecoder/tensor.hpp"

namespace wavecoder::ad {

using Value = std::variant<RealTensor, ComplexTensor>;
using Gradients = std::map<std::string, RealTensor>;

class Tape;

/// Handle to a node recorded on a tape.
class Variable {
 public:
  Variable() = default;

  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

  const Value& value() const;
  bool is_complex() const;
  const RealTensor& real() const;
  const ComplexTensor& complex() const;
  /// Value of a one-element real tensor.
  double scalar() const;
  bool requires_grad() const;

 private:
  friend class Tape;
  Variable(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Receives the adjoint and the value of a node's output and pushes
/// contributions to its parents through Tape::accumulate.
using BackwardFn = std::function<void(Tape&, const Value& adjoint, const Value& output)>;

class Tape {
 public:
  struct Node {
    std::string kind;
    std::vector<std::size_t> parents;
    Value value;
    bool requires_grad = false;
    BackwardFn backward;
    std::string parameter;  // non-empty for trainable leaves
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable real leaf. Names must be unique on the tape.
  Variable parameter(std::string name, RealTensor value);
  Variable constant(Value value);

  /// Appends an operation node. All inputs must live on this tape.
  Variable record(std::string_view kind, std::span<const Variable> inputs, Value forward,
                  BackwardFn backward);
  Variable record(std::string_view kind, std::initializer_list<Variable> inputs, Value forward,
                  BackwardFn backward) {
    return record(kind, std::span<const Variable>(inputs.begin(), inputs.size()),
                  std::move(forward), std::move(backward));
  }

  /// Adds an adjoint contribution to a node during backward.
  void accumulate(const Variable& target, Value adjoint);

  /// Runs the reverse sweep from a real scalar and returns the gradient of
  /// every trainable leaf, keyed by parameter name.
  Gradients backward(const Variable& loss);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  const Node& node(const Variable& v) const;

 private:
  void check_owned(const Variable& v, std::string_view what) const;

  std::vector<Node> nodes_;
  std::vector<std::optional<Value>> adjoints_;
  std::map<std::string, std::size_t, std::less<>> parameters_;
  bool in_backward_ = false;
};

/// Central finite-difference gradient of f at params, coordinate by coordinate.
RealTensor finite_diff_gradient(const std::function<double(const RealTensor&)>& f,
                                const RealTensor& params, double h);

/// Largest |a - b| / max(|a|, |b|, 1e-12) over two equally shaped gradients.
double max_relative_error(const RealTensor& analytic, const RealTensor& numeric);

}  // namespace wavecoder::ad
