#include "caws/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "caws/csv.hpp"

namespace caws {

RewardKind parse_reward_kind(std::string_view name) {
  if (name == "bernoulli") return RewardKind::bernoulli;
  if (name == "bounded-continuous") return RewardKind::bounded_continuous;
  throw Error("unknown reward model '" + std::string(name) + "'");
}

std::string_view to_string(RewardKind kind) {
  return kind == RewardKind::bernoulli ? "bernoulli" : "bounded-continuous";
}

double sample_reward(double mean, const RewardModel& model, Rng& rng) {
  switch (model.kind) {
    case RewardKind::bernoulli:
      return uniform01(rng) < mean ? 1.0 : 0.0;
    case RewardKind::bounded_continuous: {
      const double half_width = std::min(mean, 1.0 - mean);
      const double u = uniform01(rng);
      return std::clamp(mean + half_width * (2.0 * u - 1.0), 0.0, 1.0);
    }
  }
  return 0.0;
}

MuMap MuMap::coordinate_mean() { return MuMap{}; }

MuMap MuMap::gaussian_distance_battery(double sigma) {
  if (!(sigma > 0.0)) throw Error("gaussian map: sigma must be positive");
  MuMap m;
  m.kind_ = Kind::gaussian_distance_battery;
  m.sigma_ = sigma;
  return m;
}

MuMap MuMap::custom_table(std::size_t nodes_per_axis, std::size_t dimension,
                          std::vector<double> node_values) {
  if (nodes_per_axis < 2) throw Error("custom table: need at least 2 nodes per axis");
  std::size_t expected = 1;
  for (std::size_t j = 0; j < dimension; ++j) expected *= nodes_per_axis;
  if (node_values.size() != expected) throw Error("custom table: wrong number of node values");
  for (double v : node_values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("custom table: node value out of [0,1]");
  }
  MuMap m;
  m.kind_ = Kind::custom_table;
  m.nodes_ = nodes_per_axis;
  m.table_dimension_ = dimension;
  m.table_ = std::move(node_values);
  return m;
}

double MuMap::operator()(std::span<const double> context) const {
  switch (kind_) {
    case Kind::coordinate_mean: {
      double sum = 0.0;
      for (double x : context) sum += x;
      return sum / static_cast<double>(context.size());
    }
    case Kind::gaussian_distance_battery: {
      if (context.size() != 2) throw Error("gaussian map requires a 2-dimensional context");
      const double d = context[0];
      return std::exp(-d * d / (2.0 * sigma_ * sigma_)) * std::sqrt(context[1]);
    }
    case Kind::custom_table: {
      if (context.size() != table_dimension_) throw Error("custom table: dimension mismatch");
      const std::size_t m = table_dimension_;
      const double span = static_cast<double>(nodes_ - 1);
      std::vector<std::size_t> base(m);
      std::vector<double> frac(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double pos = context[j] * span;
        base[j] = std::min(static_cast<std::size_t>(pos), nodes_ - 2);
        frac[j] = pos - static_cast<double>(base[j]);
      }
      double value = 0.0;
      for (std::size_t corner = 0; corner < (std::size_t{1} << m); ++corner) {
        double weight = 1.0;
        std::size_t index = 0;
        std::size_t stride = 1;
        for (std::size_t j = 0; j < m; ++j) {
          const bool up = (corner >> j) & 1U;
          weight *= up ? frac[j] : 1.0 - frac[j];
          index += (base[j] + (up ? 1 : 0)) * stride;
          stride *= nodes_;
        }
        value += weight * table_[index];
      }
      return std::clamp(value, 0.0, 1.0);
    }
  }
  return 0.0;
}

HolderCertificate MuMap::certificate(std::size_t dimension) const {
  const double root_m = std::sqrt(static_cast<double>(dimension));
  switch (kind_) {
    case Kind::coordinate_mean:
      // |mean(s) - mean(s')| <= |sum(s - s')| / M <= |s - s'| / sqrt(M)
      return {1.0 / root_m, 1.0};
    case Kind::gaussian_distance_battery: {
      // Distance factor is Lipschitz with constant lg; sqrt(battery) is only
      // 1/2-Hölder with constant 1. On [0,1]^2, |s - s'| <= 2^(1/4) |s - s'|^(1/2).
      const double s2 = sigma_ * sigma_;
      const double lg = sigma_ <= 1.0 ? std::exp(-0.5) / sigma_ : std::exp(-0.5 / s2) / s2;
      return {lg * std::pow(2.0, 0.25) + 1.0, 0.5};
    }
    case Kind::custom_table: {
      double max_step = 0.0;
      std::size_t stride = 1;
      for (std::size_t j = 0; j < table_dimension_; ++j) {
        for (std::size_t idx = 0; idx < table_.size(); ++idx) {
          if ((idx / stride) % nodes_ + 1 < nodes_) {
            max_step = std::max(max_step, std::abs(table_[idx + stride] - table_[idx]));
          }
        }
        stride *= nodes_;
      }
      return {root_m * static_cast<double>(nodes_ - 1) * max_step, 1.0};
    }
  }
  return {};
}

double eval_mu_map(const MuMap& map, std::span<const double> context) { return map(context); }

MuMap parse_mu_map(std::string_view name) {
  if (name == "coordinate-mean") return MuMap::coordinate_mean();
  if (name == "gaussian-distance-battery") return MuMap::gaussian_distance_battery(1.0);
  throw Error("unknown mu-map '" + std::string(name) + "'");
}

std::string_view to_string(MuMap::Kind kind) {
  switch (kind) {
    case MuMap::Kind::coordinate_mean: return "coordinate-mean";
    case MuMap::Kind::gaussian_distance_battery: return "gaussian-distance-battery";
    case MuMap::Kind::custom_table: return "custom-table";
  }
  return "";
}

double fit_holder_constant(const MuMap& map, std::size_t dimension, double alpha,
                           std::size_t pairs, Rng& rng) {
  std::vector<double> a(dimension);
  std::vector<double> b(dimension);
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    for (std::size_t j = 0; j < dimension; ++j) {
      a[j] = uniform01(rng);
      b[j] = uniform01(rng);
    }
    double dist2 = 0.0;
    for (std::size_t j = 0; j < dimension; ++j) dist2 += (a[j] - b[j]) * (a[j] - b[j]);
    if (dist2 == 0.0) continue;
    const double ratio = std::abs(map(a) - map(b)) / std::pow(std::sqrt(dist2), alpha);
    worst = std::max(worst, ratio);
  }
  return worst;
}

void apply_mu_map(TaskInstance& instance, const MuMap& map) {
  for (WorkerSpec& w : instance.workers) w.true_mean = map(w.context);
}

std::vector<double> means_of(const MuMap& map, const ContextMatrix& contexts) {
  std::vector<double> out(contexts.rows());
  for (std::size_t i = 0; i < contexts.rows(); ++i) out[i] = map(contexts.row(i));
  return out;
}

TaskInstance gen_synthetic(const GeneratorParams& params) {
  if (params.workers == 0) throw Error("gen_synthetic: need at least one worker");
  if (params.dimension == 0) throw Error("gen_synthetic: dimension must be positive");
  if (!(params.cost_min > 0.0) || params.cost_max < params.cost_min) {
    throw Error("gen_synthetic: invalid cost range");
  }
  if (params.capacity_max < params.capacity_min) throw Error("gen_synthetic: invalid capacity range");

  Rng rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Capacity> capacity(params.capacity_min, params.capacity_max);

  TaskInstance inst;
  inst.dimension = params.dimension;
  inst.budget = params.budget;
  inst.workers.resize(params.workers);
  for (std::size_t i = 0; i < params.workers; ++i) {
    WorkerSpec& w = inst.workers[i];
    w.id = i;
    w.context.resize(params.dimension);
    for (double& x : w.context) x = unit(rng);
    w.cost = params.cost_min + (params.cost_max - params.cost_min) * unit(rng);
    w.capacity = capacity(rng);
    w.true_mean = params.mu_map(w.context);
  }
  const HolderCertificate cert = params.mu_map.certificate(params.dimension);
  inst.holder_L = cert.L;
  inst.holder_alpha = cert.alpha;
  return validate_instance(std::move(inst));
}

ContextTrace::ContextTrace(std::vector<ContextMatrix> rounds) : rounds_(std::move(rounds)) {
  for (const ContextMatrix& r : rounds_) {
    if (r.rows() != rounds_.front().rows() || r.dimension() != rounds_.front().dimension()) {
      throw Error("trace: rounds disagree on shape");
    }
    for (double x : r.data()) {
      if (!(x >= 0.0 && x <= 1.0)) throw Error("trace: context out of range");
    }
  }
}

const ContextMatrix& ContextTrace::at(std::uint64_t t) const {
  if (rounds_.empty()) throw Error("trace: empty");
  if (t == 0) throw Error("trace: rounds start at 1");
  return rounds_[std::min<std::uint64_t>(t, rounds_.size()) - 1];
}

ContextTrace gen_drift_trace(std::size_t workers, std::size_t rounds, const DriftParams& params,
                             std::uint64_t seed) {
  if (rounds == 0) throw Error("gen_drift_trace: need at least one round");
  if (!(params.decay_rate > 0.0 && params.decay_rate < 1.0)) {
    throw Error("gen_drift_trace: decay rate must be in (0,1)");
  }
  if (!(params.step_size >= 0.0 && params.step_size <= 1.0)) {
    throw Error("gen_drift_trace: step size must be in [0,1]");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ContextMatrix current(workers, 2);
  // Battery is tracked as (level at last recharge, rounds since) so long
  // traces do not accumulate subtraction error.
  std::vector<double> anchor(workers);
  std::vector<std::size_t> since(workers, 0);
  for (std::size_t i = 0; i < workers; ++i) {
    current.row(i)[0] = unit(rng);
    anchor[i] = params.start_battery ? *params.start_battery : unit(rng);
    current.row(i)[1] = anchor[i];
  }

  std::vector<ContextMatrix> out;
  out.reserve(rounds);
  out.push_back(current);
  constexpr double kSlack = 1e-9;
  for (std::size_t r = 1; r < rounds; ++r) {
    for (std::size_t i = 0; i < workers; ++i) {
      auto row = current.row(i);
      double d = row[0] + params.step_size * (2.0 * unit(rng) - 1.0);
      if (d < 0.0) d = -d;
      if (d > 1.0) d = 2.0 - d;
      row[0] = std::clamp(d, 0.0, 1.0);

      ++since[i];
      double battery = anchor[i] - static_cast<double>(since[i]) * params.decay_rate;
      if (battery < -kSlack) {
        anchor[i] = 1.0;
        since[i] = 0;
        battery = 1.0;
      }
      row[1] = std::clamp(battery, 0.0, 1.0);
    }
    out.push_back(current);
  }
  return ContextTrace(std::move(out));
}

void apply_trace_start(TaskInstance& instance, const ContextTrace& trace, const MuMap& map) {
  const ContextMatrix& first = trace.at(1);
  if (first.rows() != instance.size() || first.dimension() != instance.dimension) {
    throw Error("trace shape does not match the instance");
  }
  for (std::size_t i = 0; i < instance.size(); ++i) {
    const auto row = first.row(i);
    instance.workers[i].context.assign(row.begin(), row.end());
    instance.workers[i].true_mean = map(row);
  }
}

void write_worker_csv(std::ostream& out, const TaskInstance& instance) {
  out << "id,cost,capacity,mu";
  for (std::size_t j = 0; j < instance.dimension; ++j) out << ",ctx_" << j;
  out << '\n';
  for (const WorkerSpec& w : instance.workers) {
    out << w.id << ',' << csv::format_double(w.cost) << ',' << w.capacity << ','
        << csv::format_double(w.true_mean);
    for (double x : w.context) out << ',' << csv::format_double(x);
    out << '\n';
  }
}

namespace {

std::size_t context_columns(const std::vector<std::string_view>& header, std::size_t first,
                            std::string_view expected_prefix) {
  for (std::size_t j = first; j < header.size(); ++j) {
    if (header[j] != "ctx_" + std::to_string(j - first)) {
      throw Error("line 1: unknown header column '" + std::string(header[j]) + "' (expected " +
                  std::string(expected_prefix) + ")");
    }
  }
  return header.size() - first;
}

}  // namespace

TaskInstance read_worker_csv(std::istream& in, std::optional<std::size_t> dimension,
                             const MuMap* fill) {
  std::string line;
  if (!std::getline(in, line)) throw Error("worker csv: empty input");
  const auto header = csv::split(line);
  if (header.size() < 5 || header[0] != "id" || header[1] != "cost" || header[2] != "capacity" ||
      header[3] != "mu") {
    throw Error("line 1: unknown header, expected id,cost,capacity,mu,ctx_0,...");
  }
  const std::size_t m = context_columns(header, 4, "ctx_<j>");
  if (dimension && *dimension != m) {
    throw Error("line 1: header has " + std::to_string(m) + " context columns, expected " +
                std::to_string(*dimension));
  }

  TaskInstance inst;
  inst.dimension = m;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != 4 + m) {
      throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(4 + m) +
                  " fields, found " + std::to_string(fields.size()));
    }
    WorkerSpec w;
    w.id = csv::parse_uint(fields[0], line_no);
    w.cost = csv::parse_double(fields[1], line_no);
    const std::uint64_t cap = csv::parse_uint(fields[2], line_no);
    if (cap > std::numeric_limits<Capacity>::max()) {
      throw Error("line " + std::to_string(line_no) + ": capacity too large");
    }
    w.capacity = static_cast<Capacity>(cap);
    w.context.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      w.context[j] = csv::parse_double(fields[4 + j], line_no);
      if (!(w.context[j] >= 0.0 && w.context[j] <= 1.0)) {
        throw Error("line " + std::to_string(line_no) + ": context out of range");
      }
    }
    if (fields[3].empty()) {
      if (fill == nullptr) {
        throw Error("line " + std::to_string(line_no) + ": empty mu and no mu-map supplied");
      }
      w.true_mean = (*fill)(w.context);
    } else {
      w.true_mean = csv::parse_double(fields[3], line_no);
    }
    inst.workers.push_back(std::move(w));
  }
  return validate_instance(std::move(inst));
}

TaskInstance load_worker_csv(const std::filesystem::path& path, std::optional<std::size_t> dimension,
                             const MuMap* fill) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_worker_csv(in, dimension, fill);
}

void write_trace_csv(std::ostream& out, const ContextTrace& trace) {
  out << "t,id";
  for (std::size_t j = 0; j < trace.dimension(); ++j) out << ",ctx_" << j;
  out << '\n';
  for (std::size_t t = 1; t <= trace.rounds(); ++t) {
    const ContextMatrix& m = trace.at(t);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out << t << ',' << i;
      for (double x : m.row(i)) out << ',' << csv::format_double(x);
      out << '\n';
    }
  }
}

ContextTrace read_trace_csv(std::istream& in, const ContextMatrix& base) {
  std::string line;
  if (!std::getline(in, line)) throw Error("trace csv: empty input");
  const auto header = csv::split(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "id") {
    throw Error("line 1: unknown header, expected t,id,ctx_0,...");
  }
  const std::size_t m = context_columns(header, 2, "ctx_<j>");
  if (m != base.dimension()) {
    throw Error("line 1: trace has " + std::to_string(m) + " context columns, instance has " +
                std::to_string(base.dimension()));
  }

  // round -> (worker, context)
  std::map<std::uint64_t, std::vector<std::pair<std::size_t, std::vector<double>>>> updates;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != 2 + m) {
      throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(2 + m) +
                  " fields, found " + std::to_string(fields.size()));
    }
    const std::uint64_t t = csv::parse_uint(fields[0], line_no);
    const std::uint64_t id = csv::parse_uint(fields[1], line_no);
    if (t == 0) throw Error("line " + std::to_string(line_no) + ": rounds start at 1");
    if (id >= base.rows()) throw Error("line " + std::to_string(line_no) + ": unknown worker id");
    std::vector<double> ctx(m);
    for (std::size_t j = 0; j < m; ++j) {
      ctx[j] = csv::parse_double(fields[2 + j], line_no);
      if (!(ctx[j] >= 0.0 && ctx[j] <= 1.0)) {
        throw Error("line " + std::to_string(line_no) + ": context out of range");
      }
    }
    updates[t].emplace_back(id, std::move(ctx));
  }
  if (updates.empty()) throw Error("trace csv: no rows");

  const std::uint64_t last = updates.rbegin()->first;
  std::vector<ContextMatrix> rounds;
  rounds.reserve(last);
  ContextMatrix current = base;
  for (std::uint64_t t = 1; t <= last; ++t) {
    if (auto it = updates.find(t); it != updates.end()) {
      for (const auto& [id, ctx] : it->second) std::copy(ctx.begin(), ctx.end(), current.row(id).begin());
    }
    rounds.push_back(current);
  }
  return ContextTrace(std::move(rounds));
}

ContextTrace load_trace_csv(const std::filesystem::path& path, const ContextMatrix& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_trace_csv(in, base);
}

}  // namespace caws
