#include "sloloop/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_node_target(const std::string& id) { return id == "camera" || id == "edge"; }

}  // namespace

World::World(Scenario scenario)
    : scenario_(std::move(scenario)),
      replicas_(scenario_.recognizer.replicas),
      model_(scenario_.recognizer.model),
      queue_cap_(scenario_.recognizer.queue_cap),
      accuracy_rng_(RandomStream::derive_seed(scenario_.seed, "accuracy")) {
  validate_scenario(scenario_);
  for (const auto& c : scenario_.cameras) add_camera(c);
  faults_ = scenario_.faults;
  servers_.resize(static_cast<std::size_t>(replicas_));
}

void World::add_camera(const CameraConfig& config) {
  Camera c{config, detector_id(config),
           RandomStream(RandomStream::derive_seed(scenario_.seed, "appear/" + config.id)),
           RandomStream(RandomStream::derive_seed(scenario_.seed, "work/" + config.id)),
           0.0,
           {}};
  c.next_candidate = static_cast<double>(now_) + c.appear.exponential(1.0);
  cameras_.push_back(std::move(c));
}

void World::apply_mutations() {
  for (const auto& m : scenario_.mutations)
    if (m.tick == now_)
      for (const auto& c : m.add_cameras) add_camera(c);
}

void World::set_replicas(int replicas) {
  if (replicas < 1) throw Error(ErrorCode::invalid_value, "replicas must be >= 1");
  replicas_ = replicas;
}

void World::set_queue_cap(std::optional<int> cap) {
  if (cap && *cap < 1) throw Error(ErrorCode::invalid_value, "queue cap must be >= 1");
  queue_cap_ = cap;
}

bool World::set_frame_rate(const std::string& target, double fps) {
  if (!(fps > 0) || !std::isfinite(fps)) throw Error(ErrorCode::invalid_value, "frame rate must be > 0");
  bool found = false;
  for (auto& c : cameras_) {
    if (c.config.id == target || c.detector == target || is_node_target(target)) {
      c.config.frame_rate = fps;
      found = true;
    }
  }
  return found;
}

std::optional<double> World::frame_rate(const std::string& target) const {
  for (const auto& c : cameras_)
    if (c.config.id == target || c.detector == target || is_node_target(target))
      return c.config.frame_rate;
  return std::nullopt;
}

int World::max_replicas() const {
  const NodeProfile* cloud = scenario_.find_node("cloud");
  return cloud ? cloud->cpu_cores : 1;
}

bool World::has_component(const std::string& id) const {
  if (id == scenario_.recognizer.id || scenario_.find_node(id)) return true;
  return std::any_of(cameras_.begin(), cameras_.end(),
                     [&](const Camera& c) { return c.config.id == id || c.detector == id; });
}

std::vector<std::string> World::camera_ids() const {
  std::vector<std::string> ids;
  for (const auto& c : cameras_) ids.push_back(c.config.id);
  return ids;
}

std::vector<std::string> World::detector_ids() const {
  std::vector<std::string> ids;
  for (const auto& c : cameras_) ids.push_back(c.detector);
  return ids;
}

void World::validate_fault(const FaultSpec& f) const {
  if (!has_component(f.target))
    throw Error(ErrorCode::dangling_reference, fmt::format("fault: unknown target '{}'", f.target));
  if (!(f.magnitude > 0) || !std::isfinite(f.magnitude))
    throw Error(ErrorCode::invalid_value, "fault: magnitude must be > 0");
  if (f.t0 >= f.t1) throw Error(ErrorCode::invalid_value, "fault: t0 must be < t1");
  if (f.kind == FaultKind::cpu_pressure && f.target != scenario_.recognizer.id && f.target != "cloud")
    throw Error(ErrorCode::invalid_value, "fault: cpu_pressure applies to the recognizer only");
  for (const auto& g : faults_)
    if (g.kind == f.kind && g.target == f.target && f.t0 < g.t1 && g.t0 < f.t1)
      throw Error(ErrorCode::invalid_value,
                  fmt::format("fault: overlaps an active {} fault on '{}'", to_string(f.kind), f.target));
}

void World::inject_fault(const FaultSpec& fault) {
  validate_fault(fault);
  faults_.push_back(fault);
}

double World::cpu_multiplier(double time) const {
  double m = 1.0;
  for (const auto& f : faults_)
    if (f.kind == FaultKind::cpu_pressure && f.active_at(time)) m *= f.magnitude;
  return m;
}

double World::latency_for(std::size_t camera, double time) const {
  double extra = 0.0;
  for (const auto& f : faults_) {
    if (f.kind != FaultKind::network_latency || !f.active_at(time)) continue;
    const bool on_path = f.target == scenario_.recognizer.id || scenario_.find_node(f.target) ||
                         f.target == cameras_[camera].config.id ||
                         f.target == cameras_[camera].detector;
    if (on_path) extra += f.magnitude;
  }
  return extra;
}

double World::transport_delay() const {
  // Camera -> edge detector over the edge link, detector -> cloud recognizer
  // over the cloud link.
  const double bits = scenario_.frame_size_kb * 8e3;
  const NodeProfile* edge = scenario_.find_node("edge");
  const NodeProfile* cloud = scenario_.find_node("cloud");
  return bits / (edge->link_gbps * 1e9) + bits / (cloud->link_gbps * 1e9);
}

double World::idle_response(std::optional<std::size_t> camera, double at) const {
  const double base = scenario_.recognizer.base_service(model_) * cpu_multiplier(at);
  if (!camera) {
    double extra = 0.0;
    for (const auto& f : faults_)
      if (f.kind == FaultKind::network_latency && f.active_at(at) &&
          (f.target == scenario_.recognizer.id || scenario_.find_node(f.target)))
        extra += f.magnitude;
    return base + extra;
  }
  return base + latency_for(*camera, at);
}

void World::reconcile_servers() {
  auto active = static_cast<int>(std::count_if(servers_.begin(), servers_.end(),
                                               [](const Server& s) { return !s.retiring; }));
  for (auto& s : servers_) {
    if (active >= replicas_) break;
    if (s.retiring) {
      s.retiring = false;
      ++active;
    }
  }
  while (active < replicas_) {
    servers_.emplace_back();
    ++active;
  }
  for (std::size_t i = servers_.size(); i-- > 0 && active > replicas_;) {
    if (servers_[i].retiring) continue;
    if (servers_[i].busy) {
      servers_[i].retiring = true;
    } else {
      servers_.erase(servers_.begin() + static_cast<std::ptrdiff_t>(i));
    }
    --active;
  }
  for (auto& s : servers_) {
    if (waiting_.empty()) break;
    if (!s.busy && !s.retiring) {
      Frame f = waiting_.front();
      waiting_.pop_front();
      start_service(s, f, clock_);
    }
  }
}

void World::generate_frames(std::size_t index, double t0, double t1, TickTally& tally) {
  Camera& c = cameras_[index];
  const double p = c.config.ar_per_hour / kMaxArPerHour;
  const double duration = scenario_.event_duration_s;
  while (c.next_candidate < t1) {
    const double at = c.next_candidate;
    // The acceptance draw is taken for every candidate so that a higher AR
    // accepts a superset of the same candidates.
    if (c.appear.uniform() < p) {
      if (!c.active.empty() && at < c.active.back().second)
        c.active.back().second = std::max(c.active.back().second, at + duration);
      else
        c.active.emplace_back(at, at + duration);
    }
    c.next_candidate += c.appear.exponential(1.0);
  }

  const double fps = c.config.frame_rate;
  const double transport = transport_delay();
  for (const auto& [start, end] : c.active) {
    const double lo = std::max(start, t0);
    const double hi = std::min(end, t1);
    if (lo >= hi) continue;
    auto k = static_cast<std::int64_t>(std::ceil(lo * fps));
    while (static_cast<double>(k) / fps < lo) ++k;
    for (double g = static_cast<double>(k) / fps; g < hi; g = static_cast<double>(++k) / fps) {
      Frame f;
      f.id = next_frame_id_++;
      f.camera = index;
      f.forwarded = g;
      f.arrival = g + transport + latency_for(index, g);
      f.work = c.work.exponential(1.0);
      transit_.push(f);
      ++forwarded_;
      ++tally.forwarded[index];
    }
  }
  while (!c.active.empty() && c.active.front().second <= t1) c.active.pop_front();
}

void World::advance_clock(double to, TickTally& tally) {
  const double dt = to - clock_;
  if (dt <= 0) return;
  std::size_t busy = 0;
  for (const auto& s : servers_) busy += s.busy;
  acc_.area += static_cast<double>(waiting_.size() + busy) * dt;
  acc_.time += dt;
  tally.busy_time += static_cast<double>(busy) * dt;
  clock_ = to;
}

void World::start_service(Server& server, Frame frame, double at) {
  frame.start = at;
  frame.service = frame.work * scenario_.recognizer.base_service(model_) * cpu_multiplier(at);
  server.busy = true;
  server.busy_until = at + frame.service;
  server.frame = frame;
}

void World::on_arrival(Frame frame, double at, TickTally& tally) {
  if (queue_cap_ && waiting_.size() >= static_cast<std::size_t>(*queue_cap_)) {
    ++dropped_;
    ++tally.dropped;
    if (log_frames_)
      frame_log_.push_back({frame.id, cameras_[frame.camera].config.id, frame.forwarded,
                            frame.arrival, 0.0, 0.0, 0.0, true});
    return;
  }
  ++acc_.admitted;
  for (auto& s : servers_) {
    if (!s.busy && !s.retiring) {
      start_service(s, frame, at);
      return;
    }
  }
  waiting_.push_back(frame);
}

void World::on_completion(std::size_t index, TickTally& tally) {
  Server& s = servers_[index];
  const Frame f = s.frame;
  const double done = s.busy_until;
  ++served_;
  const double response = done - f.forwarded;
  const double sojourn = done - f.arrival;
  tally.response_sum[f.camera] += response;
  ++tally.completions[f.camera];
  tally.response_sum_all += response;
  tally.sojourn_sum += sojourn;
  ++tally.completions_all;
  ++acc_.completed;
  acc_.sojourn_sum += sojourn;
  if (log_frames_)
    frame_log_.push_back({f.id, cameras_[f.camera].config.id, f.forwarded, f.arrival, f.start,
                          f.service, done, false});
  s.busy = false;
  if (s.retiring) {
    servers_.erase(servers_.begin() + static_cast<std::ptrdiff_t>(index));
    return;
  }
  if (!waiting_.empty()) {
    Frame next = waiting_.front();
    waiting_.pop_front();
    start_service(s, next, done);
  }
}

void World::run_events(double t1, TickTally& tally) {
  while (true) {
    const double next_arrival =
        !transit_.empty() && transit_.top().arrival < t1 ? transit_.top().arrival : kInf;
    double next_done = kInf;
    std::size_t server = 0;
    for (std::size_t i = 0; i < servers_.size(); ++i) {
      if (servers_[i].busy && servers_[i].busy_until < next_done && servers_[i].busy_until < t1) {
        next_done = servers_[i].busy_until;
        server = i;
      }
    }
    if (next_arrival == kInf && next_done == kInf) break;
    if (next_done <= next_arrival) {
      advance_clock(next_done, tally);
      on_completion(server, tally);
    } else {
      const Frame f = transit_.top();
      transit_.pop();
      advance_clock(f.arrival, tally);
      on_arrival(f, f.arrival, tally);
    }
  }
  advance_clock(t1, tally);
}

std::vector<MetricPoint> World::step() {
  const double t0 = static_cast<double>(now_);
  const double t1 = t0 + 1.0;
  clock_ = std::max(clock_, t0);
  apply_mutations();
  reconcile_servers();

  TickTally tally;
  tally.forwarded.assign(cameras_.size(), 0);
  tally.response_sum.assign(cameras_.size(), 0.0);
  tally.completions.assign(cameras_.size(), 0);
  for (std::size_t i = 0; i < cameras_.size(); ++i) generate_frames(i, t0, t1, tally);
  run_events(t1, tally);

  const Tick t = now_;
  std::vector<MetricPoint> out;
  auto emit = [&](const std::string& component, const char* metric, double value) {
    out.push_back({{component, metric}, {t, value}});
  };

  std::uint64_t forwarded_total = 0;
  for (std::size_t i = 0; i < cameras_.size(); ++i) {
    const Camera& c = cameras_[i];
    forwarded_total += tally.forwarded[i];
    emit(c.config.id, "frame_rate", c.config.frame_rate);
    emit(c.detector, "detected_motions", static_cast<double>(tally.forwarded[i]));
    emit(c.detector, "response_time",
         tally.completions[i] ? tally.response_sum[i] / static_cast<double>(tally.completions[i])
                              : idle_response(i, t0));
  }
  emit("edge", "cameras", static_cast<double>(cameras_.size()));

  const RecognizerConfig& r = scenario_.recognizer;
  const auto done = static_cast<double>(tally.completions_all);
  const double base = r.base_service(model_) * cpu_multiplier(t0);
  const double capacity = static_cast<double>(std::max<std::size_t>(replicas_, servers_.size()));
  const double accuracy =
      std::clamp(r.accuracy(model_) + r.accuracy_noise * accuracy_rng_.normal(), 0.0, 1.0);
  emit(r.id, "detected_motions", static_cast<double>(forwarded_total));
  emit(r.id, "frame_processing_time", tally.completions_all ? tally.sojourn_sum / done : base);
  emit(r.id, "response_time",
       tally.completions_all ? tally.response_sum_all / done : idle_response(std::nullopt, t0));
  emit(r.id, "queue_length", static_cast<double>(waiting_.size()));
  emit(r.id, "cpu_utilization", std::min(1.0, tally.busy_time / capacity));
  emit(r.id, "detection_accuracy", accuracy);
  emit(r.id, "replicas", static_cast<double>(replicas_));
  emit(r.id, "frames_dropped", static_cast<double>(tally.dropped));

  ++now_;
  return out;
}

FrameCounters World::counters() const {
  FrameCounters c;
  c.forwarded = forwarded_;
  c.served = served_;
  c.dropped = dropped_;
  c.in_transit = transit_.size();
  c.waiting = waiting_.size();
  for (const auto& s : servers_) c.in_service += s.busy;
  return c;
}

}  // namespace sloloop
