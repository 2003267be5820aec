#include "wavecoder/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace wavecoder::ad {

namespace {

void add_into(Value& acc, Value&& delta) {
  if (acc.index() != delta.index()) {
    throw TapeError("adjoint type mismatch (real vs complex)");
  }
  std::visit(
      [&](auto& a) {
        auto& d = std::get<std::decay_t<decltype(a)>>(delta);
        if (a.shape != d.shape) throw TapeError("adjoint shape mismatch");
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += d[k];
      },
      acc);
}

}  // namespace

const Value& Variable::value() const {
  if (!tape_) throw TapeError("variable is not bound to a tape");
  return tape_->node(id_).value;
}

bool Variable::is_complex() const { return std::holds_alternative<ComplexTensor>(value()); }

const RealTensor& Variable::real() const {
  const auto* v = std::get_if<RealTensor>(&value());
  if (!v) throw TapeError("variable holds a complex value, expected real");
  return *v;
}

const ComplexTensor& Variable::complex() const {
  const auto* v = std::get_if<ComplexTensor>(&value());
  if (!v) throw TapeError("variable holds a real value, expected complex");
  return *v;
}

double Variable::scalar() const {
  const RealTensor& r = real();
  if (r.size() != 1) throw TapeError("variable is not a scalar");
  return r[0];
}

bool Variable::requires_grad() const { return tape_->node(id_).requires_grad; }

const Tape::Node& Tape::node(const Variable& v) const {
  check_owned(v, "node");
  return nodes_[v.id()];
}

void Tape::check_owned(const Variable& v, std::string_view what) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw TapeError(std::string(what) + ": variable belongs to a different tape");
  }
}

Variable Tape::parameter(std::string name, RealTensor value) {
  if (parameters_.count(name)) throw TapeError("duplicate parameter name: " + name);
  const std::size_t id = nodes_.size();
  parameters_.emplace(name, id);
  nodes_.push_back(Node{"parameter", {}, std::move(value), true, nullptr, std::move(name)});
  return Variable(this, id);
}

Variable Tape::constant(Value value) {
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{"constant", {}, std::move(value), false, nullptr, {}});
  return Variable(this, id);
}

Variable Tape::record(std::string_view kind, std::span<const Variable> inputs, Value forward,
                      BackwardFn backward) {
  if (in_backward_) throw TapeError("cannot record while running backward");
  Node node{std::string(kind), {}, std::move(forward), false, std::move(backward), {}};
  for (const auto& in : inputs) {
    check_owned(in, kind);
    node.parents.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (!node.requires_grad) node.backward = nullptr;
  const std::size_t id = nodes_.size();
  nodes_.push_back(std::move(node));
  return Variable(this, id);
}

void Tape::accumulate(const Variable& target, Value adjoint) {
  check_owned(target, "accumulate");
  if (!nodes_[target.id()].requires_grad) return;
  auto& slot = adjoints_[target.id()];
  if (!slot) {
    if (slot.emplace(std::move(adjoint)).index() != nodes_[target.id()].value.index()) {
      throw TapeError("adjoint type does not match value type for node '" +
                      nodes_[target.id()].kind + "'");
    }
  } else {
    add_into(*slot, std::move(adjoint));
  }
}

Gradients Tape::backward(const Variable& loss) {
  if (loss.tape() != this) throw TapeError("backward: loss is not on this tape");
  const auto* lv = std::get_if<RealTensor>(&nodes_[loss.id()].value);
  if (!lv || lv->size() != 1) throw TapeError("backward: loss must be a real scalar");

  adjoints_.assign(nodes_.size(), std::nullopt);
  in_backward_ = true;
  struct Reset {
    bool& flag;
    ~Reset() { flag = false; }
  } reset{in_backward_};

  adjoints_[loss.id()] = RealTensor(lv->shape, 1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!adjoints_[id] || !n.backward) continue;
    n.backward(*this, *adjoints_[id], n.value);
  }

  Gradients grads;
  for (const auto& [name, id] : parameters_) {
    const auto& value = std::get<RealTensor>(nodes_[id].value);
    if (adjoints_[id]) {
      grads.emplace(name, std::get<RealTensor>(std::move(*adjoints_[id])));
    } else {
      grads.emplace(name, RealTensor(value.shape, 0.0));
    }
  }
  adjoints_.clear();
  return grads;
}

RealTensor finite_diff_gradient(const std::function<double(const RealTensor&)>& f,
                                const RealTensor& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: step must be positive");
  RealTensor grad(params.shape);
  RealTensor probe = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    probe[k] = params[k] + h;
    const double up = f(probe);
    probe[k] = params[k] - h;
    const double down = f(probe);
    probe[k] = params[k];
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(const RealTensor& analytic, const RealTensor& numeric) {
  require_same_shape(analytic, numeric, "max_relative_error");
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double a = analytic[k];
    const double b = numeric[k];
    const double denom = std::max({std::abs(a), std::abs(b), 1e-12});
    worst = std::max(worst, std::abs(a - b) / denom);
  }
  return worst;
}

}  // namespace wavecoder::ad
