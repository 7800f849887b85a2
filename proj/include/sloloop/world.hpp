#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "sloloop/random.hpp"
#include "sloloop/scenario.hpp"
#include "sloloop/telemetry.hpp"

namespace sloloop {

/// One frame's life, kept only when the frame log is enabled.
struct FrameRecord {
  std::uint64_t id = 0;
  std::string camera;
  double forwarded = 0.0;   // detector forwards the frame
  double arrival = 0.0;     // frame reaches the recognizer queue
  double start = 0.0;       // service begins
  double service = 0.0;     // service duration
  double completion = 0.0;  // service ends
  bool dropped = false;     // refused by the queue cap on arrival
};

struct FrameCounters {
  std::uint64_t forwarded = 0;
  std::uint64_t served = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_transit = 0;
  std::uint64_t waiting = 0;
  std::uint64_t in_service = 0;

  std::uint64_t queued() const { return in_transit + waiting + in_service; }
};

/// Cumulative accumulators for the recognizer (queue plus servers).
struct QueueAccumulators {
  double time = 0.0;           // simulated seconds integrated
  double area = 0.0;           // integral of frames in the recognizer over time
  std::uint64_t admitted = 0;  // arrivals that joined the recognizer
  std::uint64_t completed = 0;
  double sojourn_sum = 0.0;    // sum of (completion - arrival) over completions
};

/// Discrete-event model of the camera -> motion detector -> recognizer
/// pipeline, advanced one tick (one simulated second) at a time.
///
/// Each camera thins a one-per-second candidate process to get animal
/// appearances at rate AR/3600; an appearance keeps the camera's motion
/// detector active for event_duration seconds (extended by overlapping
/// appearances), during which frames on the global grid k / frame_rate are
/// forwarded. Every frame carries Exp(1) work drawn at creation; its service
/// time is work x base service time of the current model x the CPU-pressure
/// multiplier at service start. The recognizer is a single FIFO queue served
/// by `replicas` identical servers.
class World {
 public:
  explicit World(Scenario scenario);

  /// Simulates tick now() and returns its telemetry, stamped with that tick.
  std::vector<MetricPoint> step();
  Tick now() const { return now_; }
  const Scenario& scenario() const { return scenario_; }

  // Configuration; changes take effect from the next step.
  int replicas() const { return replicas_; }
  void set_replicas(int replicas);
  ModelKind model() const { return model_; }
  void set_model(ModelKind model) { model_ = model; }
  std::optional<int> queue_cap() const { return queue_cap_; }
  void set_queue_cap(std::optional<int> cap);
  /// Target is a camera, its motion detector, or the camera/edge node (all
  /// cameras). Returns false for an unknown target.
  bool set_frame_rate(const std::string& target, double fps);
  std::optional<double> frame_rate(const std::string& target) const;
  int max_replicas() const;

  bool has_component(const std::string& id) const;
  std::vector<std::string> camera_ids() const;
  std::vector<std::string> detector_ids() const;

  /// Validated like scenario faults: unknown target, non-positive magnitude,
  /// empty window and overlap with a same-kind fault on the target all throw.
  void inject_fault(const FaultSpec& fault);
  double cpu_multiplier(double time) const;
  double latency_for(std::size_t camera, double time) const;

  FrameCounters counters() const;
  const QueueAccumulators& accumulators() const { return acc_; }

  void enable_frame_log(bool on) { log_frames_ = on; }
  const std::vector<FrameRecord>& frame_log() const { return frame_log_; }

 private:
  struct Camera {
    CameraConfig config;
    std::string detector;
    RandomStream appear;
    RandomStream work;
    double next_candidate = 0.0;
    std::deque<std::pair<double, double>> active;  // merged [start, end)
  };
  struct Frame {
    std::uint64_t id = 0;
    std::size_t camera = 0;
    double forwarded = 0.0;
    double arrival = 0.0;
    double work = 0.0;
    double start = 0.0;
    double service = 0.0;
  };
  struct ArrivalLater {
    bool operator()(const Frame& a, const Frame& b) const {
      return a.arrival != b.arrival ? a.arrival > b.arrival : a.id > b.id;
    }
  };
  struct Server {
    bool busy = false;
    bool retiring = false;
    double busy_until = 0.0;
    Frame frame;
  };
  struct TickTally {
    std::vector<std::uint64_t> forwarded;
    std::vector<double> response_sum;
    std::vector<std::uint64_t> completions;
    double sojourn_sum = 0.0;
    double response_sum_all = 0.0;
    std::uint64_t completions_all = 0;
    std::uint64_t dropped = 0;
    double busy_time = 0.0;
  };

  void add_camera(const CameraConfig& config);
  void apply_mutations();
  void reconcile_servers();
  void generate_frames(std::size_t index, double t0, double t1, TickTally& tally);
  void run_events(double t1, TickTally& tally);
  void advance_clock(double to, TickTally& tally);
  void start_service(Server& server, Frame frame, double at);
  void on_arrival(Frame frame, double at, TickTally& tally);
  void on_completion(std::size_t server, TickTally& tally);
  double transport_delay() const;
  double idle_response(std::optional<std::size_t> camera, double at) const;
  void validate_fault(const FaultSpec& fault) const;

  Scenario scenario_;
  Tick now_ = 0;
  double clock_ = 0.0;
  int replicas_;
  ModelKind model_;
  std::optional<int> queue_cap_;
  std::vector<Camera> cameras_;
  std::vector<FaultSpec> faults_;
  std::priority_queue<Frame, std::vector<Frame>, ArrivalLater> transit_;
  std::deque<Frame> waiting_;
  std::vector<Server> servers_;
  RandomStream accuracy_rng_;
  std::uint64_t next_frame_id_ = 0;
  std::uint64_t forwarded_ = 0;
  std::uint64_t served_ = 0;
  std::uint64_t dropped_ = 0;
  QueueAccumulators acc_;
  bool log_frames_ = false;
  std::vector<FrameRecord> frame_log_;
};

}  // namespace sloloop
