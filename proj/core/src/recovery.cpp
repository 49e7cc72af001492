#include "relurec/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace relurec {

namespace {

bool normalized_arch(Arch a) { return a == Arch::normalized || a == Arch::normalized_skip; }

Vec unit_or_zero(const Vec& v) {
  const double nrm = v.norm();
  return nrm > 0.0 ? Vec(v / nrm) : Vec(Vec::Zero(v.size()));
}

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

// A neuron reduced to a unit direction and one signed output coefficient.
struct Atom {
  Vec dir;
  double c = 0.0;
};

bool lex_less(const Vec& a, double ca, const Vec& b, double cb) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-9) return a(i) < b(i);
  }
  return ca < cb;
}

void check_mask(const Mat& x, const Vec& u, const Mask& mask) {
  const Vec xu = x * u;
  const double scale = xu.cwiseAbs().maxCoeff();
  const double eps = 1e-6 * std::max(scale, 1e-300);
  for (Eigen::Index i = 0; i < xu.size(); ++i) {
    const bool on = mask[static_cast<std::size_t>(i)] != 0;
    if ((on && xu(i) < -eps) || (!on && xu(i) > eps)) {
      throw Error(ErrorCode::inconsistent_solution,
                  "block weights contradict their activation pattern at row " + std::to_string(i));
    }
  }
}

}  // namespace

const char* to_string(Arch arch) {
  switch (arch) {
    case Arch::plain: return "plain";
    case Arch::skip: return "skip";
    case Arch::normalized: return "normalized";
    case Arch::normalized_skip: return "normalized_skip";
  }
  return "plain";
}

Arch parse_arch(std::string_view name) {
  for (Arch a : {Arch::plain, Arch::skip, Arch::normalized, Arch::normalized_skip}) {
    if (name == to_string(a)) return a;
  }
  throw Error(ErrorCode::invalid_input, "unknown architecture '" + std::string(name) + "'");
}

Arch arch_of(ProgramKind kind) {
  if (kind == ProgramKind::reg_grelu_skip) return Arch::normalized_skip;
  if (is_normalized(kind)) return Arch::normalized;
  if (has_skip(kind)) return Arch::skip;
  return Arch::plain;
}

void NetworkWeights::validate() const {
  if (second_layer.size() != first_layer.size()) throw Error(ErrorCode::invalid_shape, "layer widths differ");
  if (normalized_arch(arch) ? alphas.size() != first_layer.size() : !alphas.empty()) {
    throw Error(ErrorCode::invalid_shape, "alphas must accompany exactly the normalized architectures");
  }
  const bool wants_linear = arch == Arch::skip || arch == Arch::normalized_skip;
  if (linear_first && !wants_linear) throw Error(ErrorCode::invalid_shape, "linear neuron on an architecture without one");
  Eigen::Index d = linear_first ? linear_first->size() : -1;
  for (const Vec& w : first_layer) {
    if (d >= 0 && w.size() != d) throw Error(ErrorCode::invalid_shape, "first-layer widths differ");
    d = w.size();
    if (!all_finite(w)) throw Error(ErrorCode::invalid_input, "non-finite weight");
  }
}

Vec forward(const NetworkWeights& net, const Mat& x) {
  net.validate();
  Vec y = Vec::Zero(x.rows());
  if (net.linear_first) {
    const Vec xw = x * *net.linear_first;
    if (net.arch == Arch::skip) {
      y += net.linear_second * xw;
    } else {
      y += net.linear_alpha * net.linear_second * unit_or_zero(xw);
    }
  }
  for (std::size_t i = 0; i < net.width(); ++i) {
    const Vec xw = x * net.first_layer[i];
    switch (net.arch) {
      case Arch::plain:
      case Arch::skip:
        y += net.second_layer[i] * xw.cwiseMax(0.0);
        break;
      case Arch::normalized:
        y += net.alphas[i] * net.second_layer[i] * unit_or_zero(xw.cwiseMax(0.0));
        break;
      case Arch::normalized_skip:
        y += net.second_layer[i] * (net.alphas[i] * unit_or_zero(xw)).cwiseMax(0.0);
        break;
    }
  }
  return y;
}

RecoveryVerdict assess_recovery(const BlockSolution& sol, const ConvexProgram& prog, const PlantedModel& plant,
                                double tol) {
  if (sol.weights.size() != prog.problem.num_blocks()) {
    throw Error(ErrorCode::invalid_shape, "solution does not match the program");
  }
  const PlantedSupport sup = planted_support(prog, plant);
  RecoveryVerdict v;

  std::vector<std::size_t> planted = sup.blocks;
  std::sort(planted.begin(), planted.end());
  std::vector<std::size_t> active = sol.active_blocks;
  std::sort(active.begin(), active.end());
  for (std::size_t b : active) {
    if (!std::binary_search(planted.begin(), planted.end(), b)) ++v.extras;
  }
  for (std::size_t b : planted) {
    if (!std::binary_search(active.begin(), active.end(), b)) ++v.missing;
  }
  v.support_match = v.extras == 0 && v.missing == 0;

  // Squared distance over every block: planted blocks against their target,
  // all others against zero.
  double dist2 = 0.0;
  double ref2 = 0.0;
  std::vector<const Vec*> target_of(sol.weights.size(), nullptr);
  for (std::size_t i = 0; i < sup.blocks.size(); ++i) target_of[sup.blocks[i]] = &sup.targets[i];
  for (std::size_t b = 0; b < sol.weights.size(); ++b) {
    if (target_of[b]) {
      dist2 += (sol.weights[b] - *target_of[b]).squaredNorm();
      ref2 += target_of[b]->squaredNorm();
    } else {
      dist2 += sol.weights[b].squaredNorm();
    }
  }
  v.abs_distance = std::sqrt(dist2);
  v.rel_distance = ref2 > 0.0 ? v.abs_distance / std::sqrt(ref2) : v.abs_distance;
  v.success = v.support_match && v.rel_distance < tol;
  return v;
}

double test_distance(const BlockSolution& sol, const ConvexProgram& prog, const PlantedModel& plant,
                     const Mat& x_test) {
  if (x_test.cols() != prog.x.cols()) throw Error(ErrorCode::invalid_shape, "test data width differs");
  if (sol.weights.size() != prog.info.size()) throw Error(ErrorCode::invalid_shape, "solution does not match the program");
  const bool norm = is_normalized(prog.kind);
  Vec yhat = Vec::Zero(x_test.rows());
  for (std::size_t b = 0; b < sol.weights.size(); ++b) {
    const Vec& w = sol.weights[b];
    if (w.norm() == 0.0) continue;
    const BlockInfo& info = prog.info[b];
    const Vec xu = x_test * (info.to_direction * w);
    if (info.pattern < 0) {
      yhat += xu;
    } else if (norm) {
      yhat += info.sign * w.norm() * unit_or_zero(xu.cwiseMax(0.0));
    } else {
      yhat += info.sign * xu.cwiseMax(0.0);
    }
  }
  return (yhat - plant_output(plant, x_test)).norm();
}

NetworkWeights reconstruct_network(const BlockSolution& sol, const ConvexProgram& prog) {
  if (sol.weights.size() != prog.info.size()) throw Error(ErrorCode::invalid_shape, "solution does not match the program");
  NetworkWeights net;
  net.arch = arch_of(prog.kind);
  const bool norm = normalized_arch(net.arch);
  for (std::size_t b : sol.active_blocks) {
    const Vec& w = sol.weights[b];
    const BlockInfo& info = prog.info[b];
    const Vec u = info.to_direction * w;
    const double un = u.norm();
    if (un == 0.0) continue;
    if (info.pattern < 0) {
      if (net.arch == Arch::skip) {
        net.linear_first = u / std::sqrt(un);
        net.linear_second = std::sqrt(un);
      } else {
        net.linear_first = u / un;
        net.linear_alpha = std::sqrt(w.norm());
        net.linear_second = std::sqrt(w.norm());
      }
      continue;
    }
    check_mask(prog.x, u, prog.patterns[static_cast<std::size_t>(info.pattern)].mask);
    if (norm) {
      // |U_j w| = |w|, so alpha * w2 = |w| reproduces the block output.
      net.first_layer.push_back(u / un);
      net.alphas.push_back(std::sqrt(w.norm()));
      net.second_layer.push_back(info.sign * std::sqrt(w.norm()));
    } else {
      net.first_layer.push_back(u / std::sqrt(un));
      net.second_layer.push_back(info.sign * std::sqrt(un));
    }
  }
  return net;
}

NetworkWeights split_network(const NetworkWeights& net, std::size_t neuron, const std::vector<double>& gammas) {
  net.validate();
  if (neuron >= net.width()) throw Error(ErrorCode::invalid_input, "neuron index out of range");
  double total = 0.0;
  for (double g : gammas) {
    if (!(g >= 0.0)) throw Error(ErrorCode::invalid_input, "split weights must be nonnegative");
    total += g;
  }
  if (gammas.empty() || std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::invalid_input, "split weights must sum to 1");

  NetworkWeights out = net;
  out.first_layer.clear();
  out.second_layer.clear();
  out.alphas.clear();
  const bool norm = normalized_arch(net.arch);
  for (std::size_t i = 0; i < net.width(); ++i) {
    if (i != neuron) {
      out.first_layer.push_back(net.first_layer[i]);
      out.second_layer.push_back(net.second_layer[i]);
      if (norm) out.alphas.push_back(net.alphas[i]);
      continue;
    }
    for (double g : gammas) {
      const double s = std::sqrt(g);
      if (norm) {
        // The normalization absorbs any positive scale of w1, so split alpha instead.
        out.first_layer.push_back(net.first_layer[i]);
        out.alphas.push_back(s * net.alphas[i]);
      } else {
        out.first_layer.push_back(s * net.first_layer[i]);
      }
      out.second_layer.push_back(s * net.second_layer[i]);
    }
  }
  return out;
}

NetworkWeights canonicalize(const NetworkWeights& net, double zero_tol) {
  net.validate();
  const bool norm = normalized_arch(net.arch);

  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < net.width(); ++i) {
    const Vec& w1 = net.first_layer[i];
    const double n1 = w1.norm();
    if (n1 == 0.0) continue;
    Atom a{w1 / n1, 0.0};
    if (net.arch == Arch::normalized_skip) {
      // (alpha N(Xw))_+ with alpha < 0 equals |alpha| N(-Xw)_+.
      if (net.alphas[i] < 0.0) a.dir = -a.dir;
      a.c = std::abs(net.alphas[i]) * net.second_layer[i];
    } else if (norm) {
      a.c = net.alphas[i] * net.second_layer[i];
    } else {
      a.c = n1 * net.second_layer[i];
    }
    if (std::abs(a.c) <= zero_tol) continue;

    bool merged = false;
    for (Atom& b : atoms) {
      if (b.dir.dot(a.dir) > 1.0 - 1e-10 && sgn(b.c) == sgn(a.c)) {
        b.c += a.c;
        merged = true;
        break;
      }
    }
    if (!merged) atoms.push_back(std::move(a));
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return lex_less(a.dir, a.c, b.dir, b.c); });

  NetworkWeights out;
  out.arch = net.arch;
  for (const Atom& a : atoms) {
    const double s = std::sqrt(std::abs(a.c));
    if (norm) {
      out.first_layer.push_back(a.dir);
      out.alphas.push_back(s);
    } else {
      out.first_layer.push_back(s * a.dir);
    }
    out.second_layer.push_back(sgn(a.c) * s);
  }

  if (net.linear_first) {
    if (net.arch == Arch::skip) {
      const Vec v = net.linear_second * *net.linear_first;
      const double vn = v.norm();
      if (vn > zero_tol) {
        out.linear_first = v / std::sqrt(vn);
        out.linear_second = std::sqrt(vn);
      }
    } else {
      // alpha w2 N(Xw) is invariant under w -> t w for t > 0 and flips sign for t < 0.
      const double n1 = net.linear_first->norm();
      double c = net.linear_alpha * net.linear_second;
      if (n1 > 0.0 && std::abs(c) > zero_tol) {
        Vec dir = *net.linear_first / n1;
        Eigen::Index k = 0;
        dir.cwiseAbs().maxCoeff(&k);
        if (dir(k) < 0.0) {
          dir = -dir;
          c = -c;
        }
        out.linear_first = dir;
        out.linear_alpha = std::sqrt(std::abs(c));
        out.linear_second = sgn(c) * std::sqrt(std::abs(c));
      }
    }
  }
  return out;
}

bool is_equivalent(const NetworkWeights& a, const NetworkWeights& b, double tol) {
  if (a.arch != b.arch) return false;
  const NetworkWeights ca = canonicalize(a);
  const NetworkWeights cb = canonicalize(b);
  if (ca.width() != cb.width() || ca.linear_first.has_value() != cb.linear_first.has_value()) return false;
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)}); };
  auto close_vec = [&](const Vec& x, const Vec& y) {
    if (x.size() != y.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!close(x(i), y(i))) return false;
    }
    return true;
  };
  if (ca.linear_first) {
    if (!close_vec(*ca.linear_first, *cb.linear_first) || !close(ca.linear_second, cb.linear_second) ||
        !close(ca.linear_alpha, cb.linear_alpha)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < ca.width(); ++i) {
    if (!close_vec(ca.first_layer[i], cb.first_layer[i]) || !close(ca.second_layer[i], cb.second_layer[i])) return false;
    if (!ca.alphas.empty() && !close(ca.alphas[i], cb.alphas[i])) return false;
  }
  return true;
}

// Format:
//   relurec-network 1
//   arch <name> width <k> dim <d>
//   linear <alpha> <second> <d values>     (optional)
//   neuron <alpha> <second> <d values>     (k lines; alpha is 1 for unnormalized)
void write_network(std::ostream& os, const NetworkWeights& net) {
  net.validate();
  Eigen::Index d = 0;
  if (net.linear_first) d = net.linear_first->size();
  if (!net.first_layer.empty()) d = net.first_layer[0].size();
  os << "relurec-network 1\n";
  os << "arch " << to_string(net.arch) << " width " << net.width() << " dim " << d << '\n';
  const auto old = os.precision(17);
  auto row = [&](const char* tag, double alpha, double second, const Vec& w) {
    os << tag << ' ' << alpha << ' ' << second;
    for (Eigen::Index i = 0; i < w.size(); ++i) os << ' ' << w(i);
    os << '\n';
  };
  if (net.linear_first) row("linear", net.linear_alpha, net.linear_second, *net.linear_first);
  for (std::size_t i = 0; i < net.width(); ++i) {
    row("neuron", net.alphas.empty() ? 1.0 : net.alphas[i], net.second_layer[i], net.first_layer[i]);
  }
  os.precision(old);
}

NetworkWeights read_network(std::istream& is) {
  auto fail = [](const std::string& why) { return Error(ErrorCode::schema, "network file: " + why); };
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "relurec-network" || version != 1) throw fail("bad header");
  std::string k_arch, arch_name, k_width, k_dim;
  std::size_t width = 0;
  Eigen::Index d = 0;
  if (!(is >> k_arch >> arch_name >> k_width >> width >> k_dim >> d) || k_arch != "arch" || k_width != "width" ||
      k_dim != "dim" || d < 0) {
    throw fail("bad shape line");
  }
  NetworkWeights net;
  net.arch = parse_arch(arch_name);
  const bool norm = normalized_arch(net.arch);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double alpha = 0.0, second = 0.0;
    if (!(ls >> tag >> alpha >> second)) throw fail("bad row");
    Vec w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!(ls >> w(i))) throw fail("short row");
    }
    if (tag == "linear") {
      net.linear_first = w;
      net.linear_alpha = alpha;
      net.linear_second = second;
    } else if (tag == "neuron") {
      net.first_layer.push_back(w);
      net.second_layer.push_back(second);
      if (norm) net.alphas.push_back(alpha);
    } else {
      throw fail("unknown row tag '" + tag + "'");
    }
  }
  if (net.width() != width) throw fail("width does not match the neuron rows");
  net.validate();
  return net;
}

}  // namespace relurec
