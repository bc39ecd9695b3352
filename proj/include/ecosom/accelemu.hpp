#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ecosom/somanalysis.hpp"
#include "ecosom/somcore.hpp"

namespace ecosom {

/// Fixed-point layout of the accelerator datapath. Inputs and weights are
/// unsigned Q0.8 (k/256, k in 0..255); squared differences fit 16 bits; the
/// accumulator needs 16 + ceil(log2 N) bits and is overflow-free by width.
struct FixedConfig {
    static constexpr unsigned input_bits = 8;
    static constexpr unsigned diff_sq_bits = 16;
    static unsigned accum_bits(std::size_t n_inputs);
    static unsigned index_bits(std::size_t n_neurons);
};

unsigned ceil_log2(std::size_t n);  // ceil(log2 n), 0 for n = 1

/// Round-to-nearest k/256 (ties away from zero), saturating at k = 255.
/// Throws on components outside [0,1). The |dequantize - v| <= 1/512 bound
/// holds for v <= 255.5/256, which the dataset normalizer guarantees.
std::uint8_t quantize_component(double v);
std::vector<std::uint8_t> quantize(std::span<const double> v);
double dequantize(std::uint8_t q);

/// Exact integer squared distance between Q0.8 vectors, in accumulator units
/// of (1/256)².
std::uint32_t neuron_distance_fixed(std::span<const std::uint8_t> x,
                                    std::span<const std::uint8_t> w);

/// Clock cycles of the pairwise tree adder: ceil(log2 N).
unsigned tree_adder_cycles(std::size_t n_inputs);

struct CompareResult {
    std::size_t min_index = 0;
    std::uint32_t min_value = 0;
    unsigned rounds = 0;  // ceil(log2 M)
};

/// Emulates the recursive comparer: round 0 fills ceil(M/2) register slots
/// with pairwise minima (an unpaired tail element passes through), each later
/// round halves the live prefix while idle slots take the neutral element
/// (max value, max index). Ties keep the left operand, so the lowest index
/// wins globally.
CompareResult recursive_tree_compare(std::span<const std::uint32_t> distances);

enum class Phase { Idle, Distancing, CompareWait, Comparing, Done };

const char* phase_name(Phase p);

struct Control {
    bool rst = false;
    bool launch = false;
    bool ini = false;
};

struct InferenceResult {
    std::size_t bmu_index = 0;
    std::uint32_t bmu_distance = 0;  // accumulator units, (1/256)²
    int cluster_id = 0;
    std::uint64_t cycles_elapsed = 0;
};

struct TraceRow {
    std::uint64_t cycle = 0;
    Phase phase = Phase::Idle;
    bool rst = false, launch = false, ini = false, done = false;
    long bmu_candidate = -1;  // comparer slot-0 index tag, -1 before loaded
};

/// Cycle-accurate model of the accelerator core: weight ROM, cluster ROM,
/// input registers, ceil(M/2) comparer register slots, a cycle counter and
/// the rst/launch/ini control protocol. One instance must be driven
/// exclusively during an inference; independent instances are unrelated.
class AccelCore {
  public:
    /// Quantizes the model weights into the ROM and copies the cluster ids.
    /// Throws on dimension mismatch, weights outside [0,1), or a clustermap
    /// that does not cover every neuron.
    static AccelCore load_model(const SomModel& model, const ClusterMap& clusters);

    /// Raw construction for parametric sweeps and ROM-image loads.
    static AccelCore from_roms(std::size_t n_inputs, std::size_t n_neurons,
                               std::vector<std::uint8_t> weight_rom,
                               std::vector<std::uint8_t> cluster_rom);

    std::size_t n_inputs() const { return n_inputs_; }
    std::size_t n_neurons() const { return n_neurons_; }
    std::span<const std::uint8_t> weight_rom() const { return weight_rom_; }
    std::span<const std::uint8_t> cluster_rom() const { return cluster_rom_; }
    std::span<const std::uint8_t> weight_of(std::size_t neuron) const;

    /// Stages data on the (modeled) bus lines; a launch edge latches it.
    void present_input(std::span<const std::uint8_t> x);

    /// Applies one rising clock edge with the given control lines. Throws a
    /// protocol violation if launch is raised while the core is busy.
    void step(const Control& control);

    Phase phase() const { return phase_; }
    bool done() const { return phase_ == Phase::Done; }
    std::uint64_t cycle() const { return cycle_; }
    std::size_t comparer_slots() const { return comparer_.size(); }
    InferenceResult result() const;  // valid once done() is true

    /// Drives the full control sequence for one input: rst, present, launch,
    /// ini as soon as distances are ready, then steps to completion.
    /// cycles_elapsed always equals 3 + ceil(log2 N) + ceil(log2 M).
    InferenceResult run_inference(std::span<const double> x);

    void enable_trace(bool on = true);
    const std::vector<TraceRow>& trace() const { return trace_; }

  private:
    AccelCore() = default;

    void reset_registers();
    void compare_round();

    std::size_t n_inputs_ = 0;
    std::size_t n_neurons_ = 0;
    std::vector<std::uint8_t> weight_rom_;   // M x N, neuron-major
    std::vector<std::uint8_t> cluster_rom_;  // M

    std::vector<std::uint8_t> bus_input_;    // staged, pre-latch
    std::vector<std::uint8_t> input_regs_;   // latched on launch
    std::vector<std::uint32_t> distances_;   // valid once the distance stage ends

    struct Slot {
        std::uint32_t value = 0;
        std::size_t index = 0;
    };
    std::vector<Slot> comparer_;  // ceil(M/2) register slots
    std::size_t live_ = 0;        // live prefix length
    unsigned rounds_done_ = 0;

    Phase phase_ = Phase::Idle;
    std::uint64_t cycle_ = 0;
    unsigned dist_substep_ = 0;

    bool tracing_ = false;
    std::vector<TraceRow> trace_;
};

struct CrosscheckEntry {
    std::size_t input = 0;
    std::size_t float_bmu = 0;
    std::size_t fixed_bmu = 0;
    int float_cluster = 0;
    int fixed_cluster = 0;
    double margin = 0.0;  // float top-2 squared-distance gap
    double bound = 0.0;   // worst-case quantization perturbation
    bool guaranteed = false;
    bool bmu_match = false;
    bool cluster_match = false;
};

struct CrosscheckReport {
    std::size_t total = 0;
    std::size_t bmu_matches = 0;
    std::size_t cluster_matches = 0;
    std::size_t guaranteed = 0;
    std::size_t guaranteed_mismatches = 0;  // must stay 0; bound violation otherwise
    std::vector<CrosscheckEntry> entries;
    std::vector<std::size_t> mismatched_inputs;  // near-ties, reported, never silent
};

/// Fixed-vs-float agreement over a set of normalized inputs. Whenever the
/// float top-2 margin exceeds the computed worst-case quantization bound
/// (per-competitor: every rival's float disadvantage must exceed the two
/// perturbation bounds) the BMUs are guaranteed equal; near-tie
/// disagreements are listed, never silent. The per-component error model
/// assumes values at or below 255.5/256, which the dataset normalizer and
/// trained weights satisfy.
CrosscheckReport crosscheck_float(AccelCore& core, const SomModel& model,
                                  const ClusterMap& clusters,
                                  std::span<const std::vector<double>> inputs);

/// ROM image: "SOMA" magic, version/N/M as big-endian u16, M·N weight bytes
/// (neuron-major), then M cluster-id bytes.
void write_rom_image(std::ostream& out, const AccelCore& core);
AccelCore read_rom_image(std::istream& in);

/// Per-cycle trace CSV: cycle, phase, rst, launch, ini, done, bmu_candidate.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);

}  // namespace ecosom
