#include "ecosom/accelemu.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ecosom {

unsigned ceil_log2(std::size_t n) {
    if (n == 0) throw std::invalid_argument("ceil_log2: n must be >= 1");
    unsigned bits = 0;
    std::size_t cap = 1;
    while (cap < n) {
        cap <<= 1;
        ++bits;
    }
    return bits;
}

unsigned FixedConfig::accum_bits(std::size_t n_inputs) { return 16 + ceil_log2(n_inputs); }
unsigned FixedConfig::index_bits(std::size_t n_neurons) { return ceil_log2(n_neurons); }

std::uint8_t quantize_component(double v) {
    if (!(v >= 0.0) || v >= 1.0)
        throw std::out_of_range("quantize: component outside [0,1)");
    const double scaled = std::floor(v * 256.0 + 0.5);  // round half away from zero (v >= 0)
    return static_cast<std::uint8_t>(std::min(scaled, 255.0));
}

std::vector<std::uint8_t> quantize(std::span<const double> v) {
    std::vector<std::uint8_t> q(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) q[i] = quantize_component(v[i]);
    return q;
}

double dequantize(std::uint8_t q) { return static_cast<double>(q) / 256.0; }

std::uint32_t neuron_distance_fixed(std::span<const std::uint8_t> x,
                                    std::span<const std::uint8_t> w) {
    if (x.size() != w.size())
        throw std::invalid_argument("neuron_distance_fixed: length mismatch");
    std::uint32_t acc = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const std::int32_t d = static_cast<std::int32_t>(x[j]) - static_cast<std::int32_t>(w[j]);
        acc += static_cast<std::uint32_t>(d * d);
    }
    return acc;
}

unsigned tree_adder_cycles(std::size_t n_inputs) { return ceil_log2(n_inputs); }

namespace {

struct Tagged {
    std::uint32_t value;
    std::size_t index;
};

inline Tagged pick_min(const Tagged& a, const Tagged& b) {
    return a.value <= b.value ? a : b;  // ties keep the left (lower index)
}

}  // namespace

CompareResult recursive_tree_compare(std::span<const std::uint32_t> distances) {
    const std::size_t m = distances.size();
    if (m == 0) throw std::invalid_argument("recursive_tree_compare: empty input");
    const Tagged neutral{std::numeric_limits<std::uint32_t>::max(),
                         std::numeric_limits<std::size_t>::max()};

    std::vector<Tagged> slots((m + 1) / 2, neutral);
    // round 0: pairwise minima of the raw inputs, odd tail passes through
    for (std::size_t j = 0; j + 1 < m; j += 2)
        slots[j / 2] = pick_min({distances[j], j}, {distances[j + 1], j + 1});
    if (m % 2 == 1) slots[m / 2] = {distances[m - 1], m - 1};
    std::size_t live = (m + 1) / 2;
    unsigned rounds = m > 1 ? 1u : 0u;

    while (live > 1) {
        const std::size_t next = (live + 1) / 2;
        for (std::size_t j = 0; j + 1 < live; j += 2) slots[j / 2] = pick_min(slots[j], slots[j + 1]);
        if (live % 2 == 1) slots[next - 1] = slots[live - 1];
        for (std::size_t j = next; j < slots.size(); ++j) slots[j] = neutral;
        live = next;
        ++rounds;
    }
    return {slots.empty() ? 0 : slots[0].index, slots.empty() ? distances[0] : slots[0].value,
            rounds};
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Idle: return "idle";
        case Phase::Distancing: return "distancing";
        case Phase::CompareWait: return "compare_wait";
        case Phase::Comparing: return "comparing";
        case Phase::Done: return "done";
    }
    return "?";
}

AccelCore AccelCore::load_model(const SomModel& model, const ClusterMap& clusters) {
    const std::size_t m = model.n_neurons();
    const std::size_t n = model.n_inputs;
    if (model.weights.size() != m) throw std::invalid_argument("load_model: bad weight count");
    if (clusters.assignment.size() != m)
        throw std::invalid_argument("load_model: clustermap does not cover every neuron");

    std::vector<std::uint8_t> wrom;
    wrom.reserve(m * n);
    for (const auto& w : model.weights) {
        if (w.size() != n) throw std::invalid_argument("load_model: weight dimension mismatch");
        for (double v : w) wrom.push_back(quantize_component(v));  // throws on v >= 1
    }
    std::vector<std::uint8_t> crom;
    crom.reserve(m);
    for (int c : clusters.assignment) {
        if (c < 0) throw std::invalid_argument("load_model: unassigned neuron");
        if (c > 255) throw std::invalid_argument("load_model: cluster id exceeds ROM byte");
        crom.push_back(static_cast<std::uint8_t>(c));
    }
    return from_roms(n, m, std::move(wrom), std::move(crom));
}

AccelCore AccelCore::from_roms(std::size_t n_inputs, std::size_t n_neurons,
                               std::vector<std::uint8_t> weight_rom,
                               std::vector<std::uint8_t> cluster_rom) {
    if (n_inputs == 0 || n_neurons == 0) throw std::invalid_argument("from_roms: empty shape");
    if (weight_rom.size() != n_inputs * n_neurons || cluster_rom.size() != n_neurons)
        throw std::invalid_argument("from_roms: ROM size mismatch");
    AccelCore core;
    core.n_inputs_ = n_inputs;
    core.n_neurons_ = n_neurons;
    core.weight_rom_ = std::move(weight_rom);
    core.cluster_rom_ = std::move(cluster_rom);
    core.comparer_.assign((n_neurons + 1) / 2, Slot{});
    core.reset_registers();
    return core;
}

std::span<const std::uint8_t> AccelCore::weight_of(std::size_t neuron) const {
    return std::span(weight_rom_).subspan(neuron * n_inputs_, n_inputs_);
}

void AccelCore::present_input(std::span<const std::uint8_t> x) {
    if (x.size() != n_inputs_) throw std::invalid_argument("present_input: dimension mismatch");
    bus_input_.assign(x.begin(), x.end());
}

void AccelCore::reset_registers() {
    input_regs_.clear();
    distances_.clear();
    const Slot neutral{std::numeric_limits<std::uint32_t>::max(),
                       std::numeric_limits<std::size_t>::max()};
    std::fill(comparer_.begin(), comparer_.end(), neutral);
    live_ = 0;
    rounds_done_ = 0;
    dist_substep_ = 0;
}

void AccelCore::compare_round() {
    const Slot neutral{std::numeric_limits<std::uint32_t>::max(),
                       std::numeric_limits<std::size_t>::max()};
    auto lower = [](const Slot& a, const Slot& b) { return a.value <= b.value ? a : b; };

    if (live_ == 0) {
        // first round reads the neuron outputs directly
        const std::size_t m = n_neurons_;
        for (std::size_t j = 0; j + 1 < m; j += 2)
            comparer_[j / 2] = lower({distances_[j], j}, {distances_[j + 1], j + 1});
        if (m % 2 == 1) comparer_[m / 2] = {distances_[m - 1], m - 1};
        live_ = (m + 1) / 2;
    } else {
        const std::size_t next = (live_ + 1) / 2;
        for (std::size_t j = 0; j + 1 < live_; j += 2)
            comparer_[j / 2] = lower(comparer_[j], comparer_[j + 1]);
        if (live_ % 2 == 1) comparer_[next - 1] = comparer_[live_ - 1];
        for (std::size_t j = next; j < comparer_.size(); ++j) comparer_[j] = neutral;
        live_ = next;
    }
    ++rounds_done_;
    if (rounds_done_ >= ceil_log2(n_neurons_)) phase_ = Phase::Done;
}

void AccelCore::step(const Control& control) {
    if (control.rst) {
        reset_registers();
        cycle_ = 0;
        phase_ = Phase::Idle;
        if (tracing_) trace_.push_back({cycle_, phase_, true, control.launch, control.ini, false, -1});
        return;
    }
    ++cycle_;

    if (control.launch && phase_ != Phase::Idle)
        throw std::runtime_error("accelerator protocol violation: launch while busy");

    switch (phase_) {
        case Phase::Idle:
            if (control.launch) {
                if (bus_input_.size() != n_inputs_)
                    throw std::runtime_error("accelerator: launch without a staged input");
                input_regs_ = bus_input_;  // input-register load cycle
                phase_ = Phase::Distancing;
                dist_substep_ = 0;
            }
            break;
        case Phase::Distancing: {
            ++dist_substep_;
            // 2 difference/square cycles plus the adder tree; the comparer
            // register hand-off is absorbed into this stage
            if (dist_substep_ == 2 + tree_adder_cycles(n_inputs_)) {
                distances_.resize(n_neurons_);
                for (std::size_t i = 0; i < n_neurons_; ++i)
                    distances_[i] = neuron_distance_fixed(input_regs_, weight_of(i));
                if (ceil_log2(n_neurons_) == 0) {
                    comparer_[0] = {distances_[0], 0};
                    live_ = 1;
                    phase_ = Phase::Done;
                } else {
                    phase_ = Phase::CompareWait;
                }
            }
            break;
        }
        case Phase::CompareWait:
            if (control.ini) {
                phase_ = Phase::Comparing;
                compare_round();
            }
            break;
        case Phase::Comparing:
            compare_round();
            break;
        case Phase::Done:
            break;
    }

    if (tracing_)
        trace_.push_back({cycle_, phase_, false, control.launch, control.ini, done(),
                          live_ > 0 ? static_cast<long>(comparer_[0].index) : -1});
}

InferenceResult AccelCore::result() const {
    if (phase_ != Phase::Done) throw std::runtime_error("accelerator: result not ready");
    InferenceResult r;
    r.bmu_index = comparer_[0].index;
    r.bmu_distance = comparer_[0].value;
    r.cluster_id = cluster_rom_[r.bmu_index];
    r.cycles_elapsed = cycle_;
    return r;
}

InferenceResult AccelCore::run_inference(std::span<const double> x) {
    if (x.size() != n_inputs_) throw std::invalid_argument("run_inference: dimension mismatch");
    const auto qx = quantize(x);
    step({.rst = true});
    present_input(qx);
    step({.launch = true});
    while (phase_ == Phase::Distancing) step({});
    if (phase_ == Phase::CompareWait) step({.ini = true});
    while (!done()) step({});
    return result();
}

void AccelCore::enable_trace(bool on) {
    tracing_ = on;
    trace_.clear();
}

CrosscheckReport crosscheck_float(AccelCore& core, const SomModel& model,
                                  const ClusterMap& clusters,
                                  std::span<const std::vector<double>> inputs) {
    constexpr double eps = 1.0 / 512.0;  // per-component worst-case quantization error
    const std::size_t m = model.n_neurons();

    CrosscheckReport report;
    report.total = inputs.size();
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const auto& x = inputs[k];
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        double second_d = std::numeric_limits<double>::infinity();
        std::vector<double> dists(m, 0.0), bounds(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double d = euclidean_sq(x, model.weights[i]);
            double b = 0;
            for (std::size_t j = 0; j < x.size(); ++j)
                b += 4.0 * eps * std::abs(x[j] - model.weights[i][j]) + 4.0 * eps * eps;
            dists[i] = d;
            bounds[i] = b;
            if (d < best_d) {
                second_d = best_d;
                best = i;
                best_d = d;
            } else if (d < second_d) {
                second_d = d;
            }
        }

        CrosscheckEntry e;
        e.input = k;
        e.float_bmu = best;
        e.float_cluster = clusters.assignment[best];
        e.margin = m > 1 ? second_d - best_d : std::numeric_limits<double>::infinity();
        // a competitor i can only take the fixed BMU from c when its float
        // disadvantage D_i - D_c is within the two perturbation bounds, so
        // the guarantee needs positive slack against every competitor
        double slack = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i)
            if (i != best)
                slack = std::min(slack, (dists[i] - best_d) - (bounds[i] + bounds[best]));
        e.guaranteed = m == 1 || slack > 0.0;
        e.bound = m == 1 ? 0.0 : e.margin - slack;  // guaranteed iff margin > bound

        const auto fixed = core.run_inference(x);
        e.fixed_bmu = fixed.bmu_index;
        e.fixed_cluster = fixed.cluster_id;
        e.bmu_match = e.fixed_bmu == e.float_bmu;
        e.cluster_match = e.fixed_cluster == e.float_cluster;

        report.bmu_matches += e.bmu_match;
        report.cluster_matches += e.cluster_match;
        report.guaranteed += e.guaranteed;
        if (e.guaranteed && !e.bmu_match) ++report.guaranteed_mismatches;
        if (!e.bmu_match) report.mismatched_inputs.push_back(k);
        report.entries.push_back(std::move(e));
    }
    return report;
}

namespace {

void put_u16_be(std::ostream& out, std::uint16_t v) {
    out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xff));
}

std::uint16_t get_u16_be(std::istream& in) {
    const int hi = in.get(), lo = in.get();
    if (hi < 0 || lo < 0) throw std::runtime_error("ROM image truncated");
    return static_cast<std::uint16_t>((hi << 8) | lo);
}

}  // namespace

void write_rom_image(std::ostream& out, const AccelCore& core) {
    if (core.n_inputs() > 0xffff || core.n_neurons() > 0xffff)
        throw std::invalid_argument("ROM image: shape exceeds 16-bit header fields");
    out.write("SOMA", 4);
    put_u16_be(out, 1);  // version
    put_u16_be(out, static_cast<std::uint16_t>(core.n_inputs()));
    put_u16_be(out, static_cast<std::uint16_t>(core.n_neurons()));
    out.write(reinterpret_cast<const char*>(core.weight_rom().data()),
              static_cast<std::streamsize>(core.weight_rom().size()));
    out.write(reinterpret_cast<const char*>(core.cluster_rom().data()),
              static_cast<std::streamsize>(core.cluster_rom().size()));
}

AccelCore read_rom_image(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::string_view(magic, 4) != "SOMA")
        throw std::runtime_error("ROM image: bad magic");
    const std::uint16_t version = get_u16_be(in);
    if (version != 1) throw std::runtime_error("ROM image: unsupported version");
    const std::size_t n = get_u16_be(in);
    const std::size_t m = get_u16_be(in);
    std::vector<std::uint8_t> wrom(n * m), crom(m);
    in.read(reinterpret_cast<char*>(wrom.data()), static_cast<std::streamsize>(wrom.size()));
    in.read(reinterpret_cast<char*>(crom.data()), static_cast<std::streamsize>(crom.size()));
    if (!in) throw std::runtime_error("ROM image truncated");
    return AccelCore::from_roms(n, m, std::move(wrom), std::move(crom));
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
    out << "cycle,phase,rst,launch,ini,done,bmu_candidate\n";
    for (const auto& r : rows) {
        out << r.cycle << ',' << phase_name(r.phase) << ',' << int(r.rst) << ',' << int(r.launch)
            << ',' << int(r.ini) << ',' << int(r.done) << ',';
        if (r.bmu_candidate >= 0) out << r.bmu_candidate;
        out << '\n';
    }
}

}  // namespace ecosom
