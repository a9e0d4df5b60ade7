#include "hybridqc/hilbert.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hybridqc/errors.hpp"

namespace hybridqc {

Picture parse_picture(std::string_view tag) {
  if (tag == "schrodinger" || tag == "schroedinger" || tag == "s") return Picture::schrodinger;
  if (tag == "interaction" || tag == "i") return Picture::interaction;
  throw ValidationError("unknown picture '" + std::string(tag) + "' (expected schrodinger or interaction)");
}

std::string to_string(Picture picture) {
  return picture == Picture::schrodinger ? "schrodinger" : "interaction";
}

int BasisState::total() const {
  return std::accumulate(photons.begin(), photons.end(), 0) + std::accumulate(spins.begin(), spins.end(), 0) + cpb;
}

std::vector<int> BasisState::key() const {
  std::vector<int> k(photons);
  k.insert(k.end(), spins.begin(), spins.end());
  k.push_back(cpb);
  return k;
}

namespace {

std::size_t binomial_saturating(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  if (r > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2))
    return std::numeric_limits<std::size_t>::max() / 2;
  return static_cast<std::size_t>(std::llround(r));
}

}  // namespace

std::size_t BasisIndex::count(std::size_t mode_count, std::size_t spin_count, bool has_cpb, int cap) {
  if (cap < 0) return 0;
  const std::size_t bosons = mode_count + spin_count;
  const int top = has_cpb ? std::min(cap, 2) : 0;
  std::size_t total = 0;
  for (int j = 0; j <= top; ++j) {
    const auto rest = static_cast<std::size_t>(cap - j);
    total += binomial_saturating(rest + bosons, bosons);
  }
  return total;
}

BasisIndex::BasisIndex(std::size_t mode_count, std::size_t spin_count, bool has_cpb, int cap, std::size_t limit)
    : modes_(mode_count), spins_(spin_count), has_cpb_(has_cpb), cap_(cap) {
  if (cap < 0) throw ValidationError("excitation cap must be non-negative");
  const std::size_t dim = count(mode_count, spin_count, has_cpb, cap);
  if (dim > limit)
    throw ValidationError("basis dimension " + std::to_string(dim) + " for excitation cap " + std::to_string(cap) +
                          " exceeds the limit " + std::to_string(limit));
  const std::size_t coords = mode_count + spin_count + 1;
  std::vector<int> bound(coords, cap);
  bound.back() = has_cpb ? 2 : 0;
  states_.reserve(dim);
  std::vector<int> digits(coords, 0);

  // Depth-first in ascending digit order gives lexicographic order within a sector.
  auto emit = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == coords) {
      if (remaining > bound[pos]) return;
      digits[pos] = remaining;
      BasisState s;
      s.photons.assign(digits.begin(), digits.begin() + static_cast<long>(mode_count));
      s.spins.assign(digits.begin() + static_cast<long>(mode_count), digits.end() - 1);
      s.cpb = digits.back();
      lookup_.emplace(digits, states_.size());
      states_.push_back(std::move(s));
      return;
    }
    for (int v = 0; v <= std::min(remaining, bound[pos]); ++v) {
      digits[pos] = v;
      self(self, pos + 1, remaining - v);
    }
    digits[pos] = 0;
  };
  for (int k = 0; k <= cap; ++k) emit(emit, 0, k);
}

std::optional<std::size_t> BasisIndex::find(const BasisState& s) const {
  if (s.photons.size() != modes_ || s.spins.size() != spins_) return std::nullopt;
  auto it = lookup_.find(s.key());
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t BasisIndex::index_of(const BasisState& s) const {
  auto i = find(s);
  if (!i) throw ValidationError("basis state outside the excitation-capped basis");
  return *i;
}

BasisIndex build_basis(const DeviceSpec& device, int cap, std::size_t limit) {
  return BasisIndex(device.modes.size(), device.spins.size(), device.cpb.has_value(), cap, limit);
}

namespace {

RealSparse from_triplets(std::size_t dim, const std::vector<Eigen::Triplet<double>>& t) {
  RealSparse m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

OperatorSet build_operators(const DeviceSpec& device, const BasisIndex& basis) {
  if (basis.mode_count() != device.modes.size() || basis.spin_count() != device.spins.size() ||
      basis.has_cpb() != device.cpb.has_value())
    throw ValidationError("basis was not built from this device");
  const std::size_t dim = basis.size();
  OperatorSet ops;
  using T = Eigen::Triplet<double>;
  auto ladder = [&](auto occupancy) {
    std::vector<T> lower, number;
    for (std::size_t c = 0; c < dim; ++c) {
      BasisState s = basis[c];
      int& n = occupancy(s);
      if (n == 0) continue;
      number.emplace_back(static_cast<int>(c), static_cast<int>(c), n);
      const double amp = std::sqrt(static_cast<double>(n));
      --n;
      lower.emplace_back(static_cast<int>(basis.index_of(s)), static_cast<int>(c), amp);
    }
    return std::pair{from_triplets(dim, lower), from_triplets(dim, number)};
  };
  for (std::size_t m = 0; m < device.modes.size(); ++m) {
    auto [l, n] = ladder([m](BasisState& s) -> int& { return s.photons[m]; });
    ops.mode_lowering.push_back(std::move(l));
    ops.mode_number.push_back(std::move(n));
  }
  for (std::size_t e = 0; e < device.spins.size(); ++e) {
    auto [l, n] = ladder([e](BasisState& s) -> int& { return s.spins[e]; });
    ops.spin_lowering.push_back(std::move(l));
    ops.spin_number.push_back(std::move(n));
  }
  std::array<std::vector<T>, 2> lowering;
  std::array<std::vector<T>, 3> projector;
  std::vector<T> excitation;
  for (std::size_t c = 0; c < dim; ++c) {
    const BasisState& s = basis[c];
    const int ci = static_cast<int>(c);
    projector[static_cast<std::size_t>(s.cpb)].emplace_back(ci, ci, 1.0);
    if (s.total() > 0) excitation.emplace_back(ci, ci, s.total());
    if (s.cpb > 0) {
      BasisState down = s;
      --down.cpb;
      lowering[static_cast<std::size_t>(s.cpb - 1)].emplace_back(static_cast<int>(basis.index_of(down)), ci, 1.0);
    }
  }
  for (std::size_t j = 0; j < 2; ++j) ops.cpb_lowering[j] = from_triplets(dim, lowering[j]);
  for (std::size_t j = 0; j < 3; ++j) ops.cpb_projector[j] = from_triplets(dim, projector[j]);
  ops.excitation = from_triplets(dim, excitation);
  return ops;
}

namespace {

// Collects the nonzero pattern of raising(target) * lowering(source) times a scale.
void add_exchange(const RealSparse& raise_t, const RealSparse& lower_s, double scale, const Eigen::VectorXd& idle,
                  std::vector<Coupling>& out) {
  RealSparse product = (RealSparse(raise_t.transpose()) * lower_s).pruned();
  for (int r = 0; r < product.outerSize(); ++r)
    for (RealSparse::InnerIterator it(product, r); it; ++it) {
      const auto row = static_cast<std::size_t>(it.row());
      const auto col = static_cast<std::size_t>(it.col());
      out.push_back({row, col, scale * it.value(), idle(static_cast<long>(row)) - idle(static_cast<long>(col))});
    }
}

}  // namespace

HamiltonianTerms build_terms(const DeviceSpec& device, const BasisIndex& basis, const OperatorSet& ops) {
  const auto dim = static_cast<long>(basis.size());
  HamiltonianTerms terms;
  terms.idle = Eigen::VectorXd::Zero(dim);
  terms.loss = Eigen::VectorXd::Zero(dim);
  for (std::size_t m = 0; m < device.modes.size(); ++m) {
    Eigen::VectorXd n = ops.mode_number[m].diagonal();
    terms.idle += device.modes[m].idle_frequency() * n;
    terms.loss += device.loss_rate(device.modes[m].label) * n;
    terms.occupation.push_back(std::move(n));
  }
  for (std::size_t e = 0; e < device.spins.size(); ++e)
    terms.idle += device.spins[e].gap * Eigen::VectorXd(ops.spin_number[e].diagonal());
  if (device.cpb) {
    terms.idle += device.cpb->gap01 * Eigen::VectorXd(ops.cpb_projector[1].diagonal());
    terms.idle += (device.cpb->gap01 + device.cpb->gap12) * Eigen::VectorXd(ops.cpb_projector[2].diagonal());
  }

  for (std::size_t e = 0; e < device.spins.size(); ++e) {
    const auto& s = device.spins[e];
    const auto m = static_cast<std::size_t>(device.mode_index(s.mode));
    add_exchange(ops.mode_lowering[m], ops.spin_lowering[e], 0.5 * s.coupling, terms.idle, terms.interaction);
  }
  if (device.cpb) {
    for (const auto& c : device.cpb->couplings) {
      const auto m = static_cast<std::size_t>(device.mode_index(c.mode));
      if (c.lower != 0.0)
        add_exchange(ops.mode_lowering[m], ops.cpb_lowering[0], 0.5 * c.lower, terms.idle, terms.interaction);
      if (c.upper != 0.0)
        add_exchange(ops.mode_lowering[m], ops.cpb_lowering[1], 0.5 * c.upper, terms.idle, terms.interaction);
    }
  }
  for (const auto& h : device.hops) {
    const auto a = static_cast<std::size_t>(device.mode_index(h.first));
    const auto b = static_cast<std::size_t>(device.mode_index(h.second));
    add_exchange(ops.mode_lowering[a], ops.mode_lowering[b], -h.rate, terms.idle, terms.hopping);
  }
  auto order = [](const Coupling& x, const Coupling& y) { return std::tie(x.row, x.col) < std::tie(y.row, y.col); };
  std::sort(terms.interaction.begin(), terms.interaction.end(), order);
  std::sort(terms.hopping.begin(), terms.hopping.end(), order);
  return terms;
}

LogicalLayout logical_layout(const DeviceSpec& device) {
  LogicalLayout layout;
  layout.qubits = std::min<std::size_t>(device.spins.size(), 2);
  for (std::size_t q = 0; q < layout.qubits; ++q) {
    layout.spin[q] = q;
    const int m = device.mode_index(device.spins[q].mode);
    if (m < 0) throw ValidationError("ensemble '" + device.spins[q].label + "' references an unknown mode");
    layout.mode[q] = static_cast<std::size_t>(m);
  }
  if (layout.qubits == 2 && device.cpb) {
    const auto& modes = device.modes;
    auto coupled = [&](std::size_t m) { return device.cpb->coupling_for(modes[m].label) != nullptr; };
    if (coupled(layout.mode[0]) && coupled(layout.mode[1])) {
      layout.single_cavity = true;
    } else {
      std::array<std::size_t, 2> bus{};
      bool found = true;
      for (std::size_t q = 0; q < 2; ++q) {
        const std::string& own = modes[layout.mode[q]].label;
        std::optional<std::size_t> partner;
        for (const auto& h : device.hops) {
          std::string other;
          if (h.first == own) other = h.second;
          else if (h.second == own) other = h.first;
          else continue;
          const int idx = device.mode_index(other);
          if (idx >= 0 && coupled(static_cast<std::size_t>(idx))) partner = static_cast<std::size_t>(idx);
        }
        if (!partner) found = false;
        else bus[q] = *partner;
      }
      if (found) layout.bus = bus;
    }
  }
  return layout;
}

std::vector<std::string> logical_labels(const LogicalLayout& layout) {
  if (layout.qubits == 2) return {"00", "01", "10", "11"};
  if (layout.qubits == 1) return {"0", "1"};
  return {};
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

BasisState vacuum(const DeviceSpec& d) {
  BasisState s;
  s.photons.assign(d.modes.size(), 0);
  s.spins.assign(d.spins.size(), 0);
  return s;
}

BasisState parse_named(const DeviceSpec& d, std::string_view label) {
  BasisState s = vacuum(d);
  std::string text(label);
  std::replace(text.begin(), text.end(), ';', ',');
  std::stringstream in(text);
  std::string token;
  bool any = false;
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    any = true;
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ValidationError("unknown state label '" + std::string(label) + "'");
    const std::string lhs = trim(std::string_view(token).substr(0, eq));
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(token.substr(eq + 1), &used);
      if (trim(token.substr(eq + 1 + used)) != "") throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("bad occupation in state label '" + std::string(label) + "'");
    }
    if (value < 0) throw ValidationError("negative occupation in state label '" + std::string(label) + "'");
    if (lhs == "j") {
      if (!d.cpb || value > 2) throw ValidationError("box level out of range in '" + std::string(label) + "'");
      s.cpb = value;
      continue;
    }
    if (lhs.size() < 4 || lhs[1] != '(' || lhs.back() != ')')
      throw ValidationError("unknown state label '" + std::string(label) + "'");
    const std::string name = lhs.substr(2, lhs.size() - 3);
    if (lhs[0] == 'n') {
      const int m = d.mode_index(name);
      if (m < 0) throw ValidationError("unknown mode '" + name + "' in state label");
      s.photons[static_cast<std::size_t>(m)] = value;
    } else if (lhs[0] == 'm') {
      const int e = d.spin_index(name);
      if (e < 0) throw ValidationError("unknown ensemble '" + name + "' in state label");
      s.spins[static_cast<std::size_t>(e)] = value;
    } else {
      throw ValidationError("unknown state label '" + std::string(label) + "'");
    }
  }
  if (!any) throw ValidationError("empty state label");
  return s;
}

}  // namespace

BasisState logical_basis_state(const DeviceSpec& d, const LogicalLayout& layout, std::string_view label) {
  BasisState s = vacuum(d);
  auto qubit = [&](std::size_t q, char bit) {
    if (bit == '0') s.spins[layout.spin[q]] = 1;
    else s.photons[layout.mode[q]] = 1;
  };
  auto is_bit = [](char c) { return c == '0' || c == '1'; };
  if (label.size() == 2 && is_bit(label[0]) && is_bit(label[1])) {
    if (layout.qubits != 2) throw ValidationError("two-qubit label '" + std::string(label) + "' needs two ensembles");
    qubit(0, label[0]);
    qubit(1, label[1]);
    return s;
  }
  if (label.size() == 1 && is_bit(label[0])) {
    if (layout.qubits != 1) throw ValidationError("single-qubit label '" + std::string(label) + "' needs one ensemble");
    qubit(0, label[0]);
    return s;
  }
  if (label == "vac") return s;
  if (label == "eta" || label == "xi" || label == "zeta") {
    if (!d.cpb || layout.qubits != 2 || (!layout.bus && !layout.single_cavity))
      throw ValidationError("auxiliary state '" + std::string(label) + "' is undefined for this device");
    if (label == "zeta") {
      s.cpb = 2;
    } else if (layout.single_cavity) {
      if (label == "eta") {
        s.cpb = 1;
        s.photons[layout.mode[1]] = 1;
      } else {
        s.cpb = 2;
      }
    } else if (label == "eta") {
      s.photons[(*layout.bus)[0]] = 1;
      s.photons[(*layout.bus)[1]] = 1;
    } else {
      s.cpb = 1;
      s.photons[(*layout.bus)[1]] = 1;
    }
    return s;
  }
  return parse_named(d, label);
}

System::System(DeviceSpec device, int cap, std::size_t limit)
    : device_(std::move(device)),
      basis_(build_basis(device_, cap, limit)),
      ops_(build_operators(device_, basis_)),
      terms_(build_terms(device_, basis_, ops_)),
      layout_(logical_layout(device_)),
      adjacency_(basis_.size()) {
  for (const auto* list : {&terms_.interaction, &terms_.hopping})
    for (const auto& c : *list) {
      adjacency_[c.row].emplace_back(c.col, c.value);
      adjacency_[c.col].emplace_back(c.row, c.value);
    }
  for (auto& a : adjacency_) std::sort(a.begin(), a.end());
}

Eigen::VectorXd System::diagonal(std::span<const double> detunings) const {
  if (detunings.size() != device_.modes.size()) throw ValidationError("one detuning per mode is required");
  Eigen::VectorXd d = terms_.idle;
  for (std::size_t m = 0; m < detunings.size(); ++m)
    if (detunings[m] != 0.0) d += detunings[m] * terms_.occupation[m];
  return d;
}

void System::apply(std::span<const double> detunings, Picture picture, double t, bool loss,
                   const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const auto dim = static_cast<long>(dimension());
  out.resize(dim);
  if (detunings.size() != device_.modes.size()) throw ValidationError("one detuning per mode is required");
  for (long i = 0; i < dim; ++i) {
    double d = picture == Picture::schrodinger ? terms_.idle(i) : 0.0;
    for (std::size_t m = 0; m < detunings.size(); ++m) d += detunings[m] * terms_.occupation[m](i);
    complex diag(d, loss ? -terms_.loss(i) : 0.0);
    out(i) = diag * in(i);
  }
  for (const auto* list : {&terms_.interaction, &terms_.hopping})
    for (const auto& c : *list) {
      const auto r = static_cast<long>(c.row), k = static_cast<long>(c.col);
      if (picture == Picture::schrodinger) {
        out(r) += c.value * in(k);
        out(k) += c.value * in(r);
      } else {
        const complex phase = std::polar(c.value, c.mismatch * t);
        out(r) += phase * in(k);
        out(k) += std::conj(phase) * in(r);
      }
    }
}

void System::apply_couplings(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  out.setZero(in.size());
  for (const auto* list : {&terms_.interaction, &terms_.hopping})
    for (const auto& c : *list) {
      const auto r = static_cast<long>(c.row), k = static_cast<long>(c.col);
      out(r) += c.value * in(k);
      out(k) += c.value * in(r);
    }
}

ComplexSparse System::hamiltonian(std::span<const double> detunings, Picture picture, double t, bool loss) const {
  Eigen::VectorXd d = diagonal(detunings);
  if (picture == Picture::interaction) d -= terms_.idle;
  std::vector<Eigen::Triplet<complex>> trip;
  const auto dim = static_cast<int>(dimension());
  for (int i = 0; i < dim; ++i) {
    const complex value(d(i), loss ? -terms_.loss(i) : 0.0);
    if (value != complex(0.0)) trip.emplace_back(i, i, value);
  }
  for (const auto* list : {&terms_.interaction, &terms_.hopping})
    for (const auto& c : *list) {
      const complex phase =
          picture == Picture::schrodinger ? complex(c.value) : std::polar(c.value, c.mismatch * t);
      trip.emplace_back(static_cast<int>(c.row), static_cast<int>(c.col), phase);
      trip.emplace_back(static_cast<int>(c.col), static_cast<int>(c.row), std::conj(phase));
    }
  ComplexSparse h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  return h;
}

Eigen::MatrixXcd System::dense_hamiltonian(std::span<const double> detunings, Picture picture, double t,
                                           bool loss) const {
  return Eigen::MatrixXcd(hamiltonian(detunings, picture, t, loss));
}

std::size_t System::state_index(std::string_view label) const {
  BasisState s = logical_basis_state(device_, layout_, label);
  auto idx = basis_.find(s);
  if (!idx)
    throw ValidationError("state '" + std::string(label) + "' lies above the excitation cap " +
                          std::to_string(basis_.cap()));
  return *idx;
}

Eigen::VectorXcd System::state(std::string_view label) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<long>(dimension()));
  v(static_cast<long>(state_index(label))) = 1.0;
  return v;
}

std::string System::describe(std::size_t index) const {
  const BasisState& s = basis_[index];
  std::vector<std::string> parts;
  for (std::size_t m = 0; m < s.photons.size(); ++m)
    if (s.photons[m]) parts.push_back("n(" + device_.modes[m].label + ")=" + std::to_string(s.photons[m]));
  for (std::size_t e = 0; e < s.spins.size(); ++e)
    if (s.spins[e]) parts.push_back("m(" + device_.spins[e].label + ")=" + std::to_string(s.spins[e]));
  if (s.cpb) parts.push_back("j=" + std::to_string(s.cpb));
  if (parts.empty()) return "vac";
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out += "," + parts[i];
  return out;
}

Eigen::VectorXcd System::to_interaction(const Eigen::VectorXcd& psi, double t) const {
  Eigen::VectorXcd out(psi.size());
  for (long i = 0; i < psi.size(); ++i) out(i) = std::polar(1.0, terms_.idle(i) * t) * psi(i);
  return out;
}

Eigen::VectorXcd System::to_schrodinger(const Eigen::VectorXcd& psi, double t) const {
  Eigen::VectorXcd out(psi.size());
  for (long i = 0; i < psi.size(); ++i) out(i) = std::polar(1.0, -terms_.idle(i) * t) * psi(i);
  return out;
}

AssembledHamiltonian assemble_hamiltonian(const System& system, std::span<const double> detunings, Picture picture,
                                          double t, bool loss) {
  AssembledHamiltonian out;
  const auto& modes = system.device().modes;
  for (std::size_t m = 0; m < modes.size() && m < detunings.size(); ++m)
    if (!modes[m].within_bounds(detunings[m])) {
      std::ostringstream msg;
      msg << "detuning of mode " << modes[m].label << " exceeds its tuning bound";
      out.warnings.push_back(msg.str());
    }
  out.matrix = system.hamiltonian(detunings, picture, t, loss);
  return out;
}

Eigen::VectorXcd logical_state(const System& system, std::string_view label) { return system.state(label); }

DressedStates dressed_states(const System& system, std::span<const double> detunings,
                             const std::vector<std::size_t>& bare) {
  DressedStates out;
  out.bare = bare;
  const Eigen::VectorXd diag = system.diagonal(detunings);
  const auto& basis = system.basis();
  std::map<int, std::pair<std::vector<std::size_t>, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>>> sectors;
  for (std::size_t b : bare) {
    const int k = basis[b].total();
    auto it = sectors.find(k);
    if (it == sectors.end()) {
      std::vector<std::size_t> members;
      std::vector<long> position(basis.size(), -1);
      for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i].total() == k) {
          position[i] = static_cast<long>(members.size());
          members.push_back(i);
        }
      const auto n = static_cast<long>(members.size());
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      for (long i = 0; i < n; ++i) h(i, i) = diag(static_cast<long>(members[static_cast<std::size_t>(i)]));
      for (const auto* list : {&system.terms().interaction, &system.terms().hopping})
        for (const auto& c : *list) {
          const long r = position[c.row], q = position[c.col];
          if (r < 0 || q < 0) continue;
          h(r, q) += c.value;
          h(q, r) += c.value;
        }
      it = sectors.emplace(k, std::pair{members, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h)}).first;
    }
    const auto& [members, solver] = it->second;
    const long local = std::find(members.begin(), members.end(), b) - members.begin();
    long best = 0;
    solver.eigenvectors().row(local).cwiseAbs().maxCoeff(&best);
    Eigen::VectorXd v = solver.eigenvectors().col(best);
    if (v(local) < 0) v = -v;
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<long>(basis.size()));
    for (std::size_t i = 0; i < members.size(); ++i) full(static_cast<long>(members[i])) = v(static_cast<long>(i));
    out.energies.push_back(solver.eigenvalues()(best));
    out.vectors.push_back(std::move(full));
  }
  return out;
}

}  // namespace hybridqc
