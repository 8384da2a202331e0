#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "airshadow/config.hpp"
#include "airshadow/core.hpp"
#include "airshadow/rng.hpp"
#include "airshadow/series.hpp"

namespace airshadow {

/// Well-mixed single-zone constants. Rates are per second; CO2 generation is
/// in ppm*m^3/s per occupant so that g*n/V is a ppm/s source.
struct ZoneParams {
    double volume = 150.0;          // m^3
    double co2_outdoor = 400.0;     // ppm
    double lambda_base = 1.0e-4;    // air exchange with doors/windows shut
    double lambda_fan = 6.0e-4;     // extra exchange while the fan runs
    double co2_generation = 4.346;  // see calibrate_co2_generation()

    double ambient_temp = 26.0;
    double ac_setpoint = 23.0;
    double kappa_on = 1.5e-3;  // relaxation towards the setpoint
    double kappa_off = 5.0e-4; // relaxation back to ambient
    double ambient_rh = 55.0;
    double ac_rh = 45.0;
    double rh_rate = 4.0e-4;

    double voc_baseline = 100.0;
    double voc_eating_rate = 4.0; // index/s while eating
    double voc_decay = 1.0e-2;
    double eating_duration = 600.0;

    double pm25_baseline = 10.0;
    double pm10_baseline = 20.0;
    double pm_decay = 2.0e-3;
    double pm25_enter_impulse = 12.0; // tracked-in particles per entering person
    double pm10_enter_impulse = 40.0;
    double pm_exit_factor = 0.3;      // exit impulse relative to enter
    double pm25_fan_source = 0.02;    // resuspension while the fan runs, per s
    double pm10_fan_source = 0.08;

    double gathering_min = 3.0; // extra persons, uniform integer
    double gathering_max = 8.0;
    double gathering_min_duration = 900.0;
    double gathering_max_duration = 2700.0;

    /// Day-to-day drift of the outdoor conditions, redrawn at every midnight
    /// of simulated time. All zero keeps the zone stationary.
    double day_temp_sigma = 0.0;   // degC, ambient temperature
    double day_rh_sigma = 0.0;     // %, ambient humidity
    double day_co2_sigma = 0.0;    // ppm, outdoor CO2
    double day_voc_sigma = 0.0;    // index, VOC baseline
    double day_pm_log_sigma = 0.0; // PM baselines, multiplicative
    double day_lambda_log_sigma = 0.0; // baseline air exchange, multiplicative

    /// Throws Error(InvalidScenario) naming the first bad field.
    void validate() const;
    double baseline(PollutantKind p) const;
    bool drifts() const noexcept;
    bool operator==(const ZoneParams&) const = default;
};

/// Zone parameters for day `day` of a run seeded with `seed`. Returns
/// `params` unchanged when it has no drift.
ZoneParams zone_for_day(const ZoneParams& params, std::uint64_t seed, std::size_t day);

struct ZoneState {
    double t = 0.0;
    int occupancy = 0;
    bool fan = false;
    bool ac = false;
    double eating_remaining = 0.0; // seconds of VOC source left
    std::array<double, kPollutantCount> values{};

    double& operator[](PollutantKind p) { return values[index_of(p)]; }
    double operator[](PollutantKind p) const { return values[index_of(p)]; }
    bool operator==(const ZoneState&) const = default;
};

/// State at rest: every pollutant at its baseline, nobody inside.
ZoneState resting_state(const ZoneParams& params);

/// One explicit-Euler step. Throws Error(NonPositiveDt).
ZoneState step_zone(const ZoneState& state, const ZoneParams& params, double dt = 1.0);

/// Closed-form CO2 with constant occupancy and fan state.
double co2_closed_form(double t, double c0, int occupancy, bool fan, const ZoneParams& params);

/// Per-occupant generation g that takes a room from `c0` to `target` ppm
/// after `seconds` with `occupancy` people and the fan off.
double calibrate_co2_generation(double target, double c0, int occupancy, double seconds, const ZoneParams& params);

struct ScriptEvent {
    double t = 0.0; // seconds since scenario start
    ActivityLabel label = ActivityLabel::Enter;
    bool annotated = true; // false: happens but nobody wrote it down

    bool operator==(const ScriptEvent&) const = default;
};

struct DevicePlacement {
    DeviceId id;
    double weight = 1.0; // (0, 1], proximity to the sources

    bool operator==(const DevicePlacement&) const = default;
};

struct SensorNoise {
    std::array<double, kPollutantCount> sigma{5.0, 2.0, 1.0, 2.0, 0.05, 0.3};
    std::array<double, kPollutantCount> bias_sigma{10.0, 5.0, 1.0, 2.0, 0.2, 1.0};
    /// Acceptable mean absolute gap between two colocated devices.
    std::array<double, kPollutantCount> margin{50.0, 25.0, 5.0, 10.0, 1.0, 5.0};

    bool operator==(const SensorNoise&) const = default;
};

struct Scenario {
    double duration = 3600.0; // seconds, one grid cell per second
    double epoch = 1699920000.0; // unix time of t = 0 (a UTC midnight)
    ZoneParams zone;
    ZoneState initial;
    std::vector<ScriptEvent> script; // sorted by t
    std::vector<DevicePlacement> devices;
    SensorNoise noise;

    /// Throws Error(InvalidScenario).
    void validate() const;
    std::vector<DeviceId> device_ids() const;
    std::vector<ActivityAnnotation> annotations() const;
    bool operator==(const Scenario&) const = default;
};

/// observed = true + (weight - 1) * (true - baseline) + bias + N(0, sigma),
/// clamped to the physical range. Biases are drawn once per device; noise is
/// consumed per cell, then per device, then per pollutant.
class SensorModel {
public:
    SensorModel(const ZoneParams& params, const SensorNoise& noise, std::vector<DevicePlacement> devices,
                std::uint64_t seed);

    /// Writes cell `k` of every device channel in `observed`.
    void observe(const std::array<double, kPollutantCount>& truth, AlignedSeries& observed, std::size_t k);

    const std::vector<std::array<double, kPollutantCount>>& bias() const noexcept { return bias_; }

private:
    std::array<double, kPollutantCount> baseline_{};
    SensorNoise noise_;
    std::vector<DevicePlacement> devices_;
    std::vector<std::array<double, kPollutantCount>> bias_;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Observed per-device series for a single-channel-set truth series.
AlignedSeries apply_sensor_model(const AlignedSeries& truth, const ZoneParams& params, const SensorNoise& noise,
                                 std::span<const DevicePlacement> devices, std::uint64_t seed);

/// Integrates a scenario at 1 Hz in chunks. The truth series has a single
/// pseudo-device named "zone".
class ScenarioRunner {
public:
    ScenarioRunner(Scenario scenario, std::uint64_t seed);

    struct Chunk {
        AlignedSeries truth;
        AlignedSeries observed;
    };

    bool done() const noexcept { return cell_ >= total_cells_; }
    std::size_t cells_done() const noexcept { return cell_; }
    std::size_t total_cells() const noexcept { return total_cells_; }
    const ZoneState& state() const noexcept { return state_; }
    const Scenario& scenario() const noexcept { return scenario_; }

    /// Next `cells` seconds (fewer at the end).
    Chunk advance(std::size_t cells);

private:
    void apply_event(const ScriptEvent& ev);

    Scenario scenario_;
    ZoneState state_;
    std::size_t cell_ = 0;
    std::size_t total_cells_ = 0;
    std::size_t next_event_ = 0;
    std::vector<std::pair<double, int>> gatherings_; // release time, persons
    std::uint64_t seed_ = 0;
    std::size_t day_ = 0;
    ZoneParams zone_;
    Rng events_rng_;
    SensorModel sensors_;
};

struct SimulationResult {
    AlignedSeries truth;
    AlignedSeries observed;
    std::vector<ActivityAnnotation> annotations;
};

/// Whole scenario in one go. Throws Error(InvalidScenario).
SimulationResult simulate_scenario(const Scenario& sc, std::uint64_t seed);

struct GeneratorOptions {
    double tau = 600.0;            // events are spaced at least 2*tau apart
    double day_start = 9 * 3600.0; // annotated activity happens within these hours
    double day_end = 23 * 3600.0;
    double night_reset = 1800.0;   // silent end-of-day exits and fan off
};

/// Lab-style scenario with the requested number of annotated events per
/// label. Deterministic in `seed`. Throws Error(Infeasible).
Scenario generate_scenario(const std::map<ActivityLabel, std::size_t>& class_counts, double duration,
                           std::uint64_t seed, const GeneratorOptions& opts = {});

/// Event mix used for the three-month lab dataset (705 annotations).
std::map<ActivityLabel, std::size_t> lab_class_counts();

/// Four devices near the door, fan, AC and desks.
std::vector<DevicePlacement> lab_devices();

enum class Preset { Lab, Exam, AirConditioning, Eating };

/// Ready-made pilot scenarios.
///  - Exam: 40 people enter at t = 0 into a shut classroom and leave after
///    2 h 15 min; generation rate calibrated to peak near 5000 ppm.
///  - AirConditioning: AC switched on at t = 600 s in a 26 C room.
///  - Eating: someone eats next to the desk device at t = 600 s.
///  - Lab: empty script with the lab zone and devices.
Scenario preset_scenario(Preset preset);
Preset parse_preset(std::string_view name);

/// Scenario file: see docs/formats.md. `seed` drives [generate] sections.
Scenario scenario_from_config(const Config& cfg, std::uint64_t seed);
void write_scenario(std::ostream& out, const Scenario& sc);

/// Mean absolute difference between two devices on one pollutant.
double inter_device_gap(const AlignedSeries& observed, std::size_t a, std::size_t b, PollutantKind p);

} // namespace airshadow
