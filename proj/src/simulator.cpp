#include "airshadow/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace airshadow {

namespace {

constexpr double kDay = 86400.0;

void require(bool ok, const char* field) {
    if (!ok) throw Error(ErrorKind::InvalidScenario, field);
}

bool needs_occupant(ActivityLabel l) { return l != ActivityLabel::Enter; }

} // namespace

void ZoneParams::validate() const {
    require(volume > 0.0, "volume");
    require(co2_outdoor >= 0.0, "co2_outdoor");
    for (auto [v, name] : {std::pair{lambda_base, "lambda_base"}, {lambda_fan, "lambda_fan"},
                           {co2_generation, "co2_generation"}, {kappa_on, "kappa_on"}, {kappa_off, "kappa_off"},
                           {rh_rate, "rh_rate"}, {voc_eating_rate, "voc_eating_rate"}, {voc_decay, "voc_decay"},
                           {eating_duration, "eating_duration"}, {pm_decay, "pm_decay"},
                           {pm25_enter_impulse, "pm25_enter_impulse"}, {pm10_enter_impulse, "pm10_enter_impulse"},
                           {pm_exit_factor, "pm_exit_factor"}, {pm25_fan_source, "pm25_fan_source"},
                           {pm10_fan_source, "pm10_fan_source"}, {voc_baseline, "voc_baseline"},
                           {pm25_baseline, "pm25_baseline"}, {pm10_baseline, "pm10_baseline"},
                           {day_temp_sigma, "day_temp_sigma"}, {day_rh_sigma, "day_rh_sigma"},
                           {day_co2_sigma, "day_co2_sigma"}, {day_voc_sigma, "day_voc_sigma"},
                           {day_pm_log_sigma, "day_pm_log_sigma"}, {day_lambda_log_sigma, "day_lambda_log_sigma"}})
        require(v >= 0.0 && std::isfinite(v), name);
    require(ac_setpoint < ambient_temp, "ac_setpoint");
    require(ambient_rh >= 0.0 && ambient_rh <= 100.0, "ambient_rh");
    require(ac_rh >= 0.0 && ac_rh <= 100.0, "ac_rh");
    require(gathering_min >= 1.0 && gathering_min <= gathering_max, "gathering_min");
    require(gathering_min_duration > 0.0 && gathering_min_duration <= gathering_max_duration,
            "gathering_min_duration");
}

double ZoneParams::baseline(PollutantKind p) const {
    switch (p) {
    case PollutantKind::CO2: return co2_outdoor;
    case PollutantKind::VOC: return voc_baseline;
    case PollutantKind::PM2_5: return pm25_baseline;
    case PollutantKind::PM10: return pm10_baseline;
    case PollutantKind::Temperature: return ambient_temp;
    case PollutantKind::Humidity: return ambient_rh;
    }
    return 0.0;
}

bool ZoneParams::drifts() const noexcept {
    return day_temp_sigma > 0.0 || day_rh_sigma > 0.0 || day_co2_sigma > 0.0 || day_voc_sigma > 0.0 ||
           day_pm_log_sigma > 0.0 || day_lambda_log_sigma > 0.0;
}

ZoneParams zone_for_day(const ZoneParams& params, std::uint64_t seed, std::size_t day) {
    if (!params.drifts()) return params;
    Rng rng = make_rng(seed, "weather", day);
    std::normal_distribution<double> normal(0.0, 1.0);
    ZoneParams z = params;
    z.ambient_temp = std::max(params.ambient_temp + params.day_temp_sigma * normal(rng), params.ac_setpoint + 0.5);
    z.ambient_rh = std::clamp(params.ambient_rh + params.day_rh_sigma * normal(rng), 5.0, 95.0);
    z.co2_outdoor = std::max(params.co2_outdoor + params.day_co2_sigma * normal(rng), 300.0);
    z.voc_baseline = std::max(params.voc_baseline + params.day_voc_sigma * normal(rng), 0.0);
    const double pm = std::exp(params.day_pm_log_sigma * normal(rng));
    z.pm25_baseline = params.pm25_baseline * pm;
    z.pm10_baseline = params.pm10_baseline * pm;
    z.lambda_base = params.lambda_base * std::exp(params.day_lambda_log_sigma * normal(rng));
    return z;
}

ZoneState resting_state(const ZoneParams& params) {
    ZoneState s;
    for (auto p : kAllPollutants) s[p] = params.baseline(p);
    return s;
}

ZoneState step_zone(const ZoneState& state, const ZoneParams& params, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorKind::NonPositiveDt, format_real(dt));
    ZoneState next = state;
    const double lambda = params.lambda_base + (state.fan ? params.lambda_fan : 0.0);

    const double co2 = state[PollutantKind::CO2];
    next[PollutantKind::CO2] =
        co2 + dt * (params.co2_generation * state.occupancy / params.volume - lambda * (co2 - params.co2_outdoor));

    const double kappa = state.ac ? params.kappa_on : params.kappa_off;
    const double target = state.ac ? params.ac_setpoint : params.ambient_temp;
    const double temp = state[PollutantKind::Temperature];
    next[PollutantKind::Temperature] = temp - dt * kappa * (temp - target);

    const double eating_share = std::min(state.eating_remaining, dt) / dt;
    const double voc = state[PollutantKind::VOC];
    next[PollutantKind::VOC] =
        voc + dt * (params.voc_eating_rate * eating_share - params.voc_decay * (voc - params.voc_baseline));
    next.eating_remaining = std::max(0.0, state.eating_remaining - dt);

    const double pm25 = state[PollutantKind::PM2_5];
    const double pm10 = state[PollutantKind::PM10];
    next[PollutantKind::PM2_5] = pm25 + dt * ((state.fan ? params.pm25_fan_source : 0.0) -
                                              params.pm_decay * (pm25 - params.pm25_baseline));
    next[PollutantKind::PM10] = pm10 + dt * ((state.fan ? params.pm10_fan_source : 0.0) -
                                             params.pm_decay * (pm10 - params.pm10_baseline));

    const double rh_target = state.ac ? params.ac_rh : params.ambient_rh;
    const double rh = state[PollutantKind::Humidity];
    next[PollutantKind::Humidity] = std::clamp(rh - dt * params.rh_rate * (rh - rh_target), 0.0, 100.0);

    next.t = state.t + dt;
    return next;
}

double co2_closed_form(double t, double c0, int occupancy, bool fan, const ZoneParams& params) {
    const double lambda = params.lambda_base + (fan ? params.lambda_fan : 0.0);
    const double source = params.co2_generation * occupancy / params.volume;
    if (lambda == 0.0) return c0 + source * t;
    const double decay = std::exp(-lambda * t);
    return params.co2_outdoor + source / lambda * (1.0 - decay) + (c0 - params.co2_outdoor) * decay;
}

double calibrate_co2_generation(double target, double c0, int occupancy, double seconds, const ZoneParams& params) {
    if (occupancy <= 0 || !(seconds > 0.0)) throw Error(ErrorKind::InvalidScenario, "calibration");
    const double lambda = params.lambda_base;
    const double n = occupancy;
    if (lambda == 0.0) return (target - c0) * params.volume / (n * seconds);
    const double decay = std::exp(-lambda * seconds);
    const double excess = target - params.co2_outdoor - (c0 - params.co2_outdoor) * decay;
    return excess * lambda * params.volume / (n * (1.0 - decay));
}

void Scenario::validate() const {
    zone.validate();
    require(duration >= 1.0 && std::isfinite(duration), "duration");
    require(std::isfinite(epoch), "epoch");
    require(!devices.empty(), "devices");
    for (const auto& d : devices) require(d.weight > 0.0 && d.weight <= 1.0, "weight");
    for (std::size_t i = 0; i < devices.size(); ++i)
        for (std::size_t j = i + 1; j < devices.size(); ++j) require(devices[i].id != devices[j].id, "devices");
    for (std::size_t i = 0; i < script.size(); ++i) {
        require(script[i].t >= 0.0 && script[i].t < duration, "script");
        require(i == 0 || script[i - 1].t <= script[i].t, "script");
    }
    for (std::size_t p = 0; p < kPollutantCount; ++p)
        require(noise.sigma[p] >= 0.0 && noise.bias_sigma[p] >= 0.0 && noise.margin[p] >= 0.0, "noise");
    require(initial.occupancy >= 0, "initial.occupancy");
    require(initial[PollutantKind::Humidity] >= 0.0 && initial[PollutantKind::Humidity] <= 100.0, "initial.rh");
}

std::vector<DeviceId> Scenario::device_ids() const {
    std::vector<DeviceId> out;
    for (const auto& d : devices) out.push_back(d.id);
    return out;
}

std::vector<ActivityAnnotation> Scenario::annotations() const {
    std::vector<ActivityAnnotation> out;
    for (const auto& ev : script)
        if (ev.annotated) out.push_back({epoch + ev.t, ev.label, std::nullopt});
    return out;
}

SensorModel::SensorModel(const ZoneParams& params, const SensorNoise& noise, std::vector<DevicePlacement> devices,
                         std::uint64_t seed)
    : noise_(noise), devices_(std::move(devices)), rng_(make_rng(seed, "noise")) {
    for (auto p : kAllPollutants) baseline_[index_of(p)] = params.baseline(p);
    Rng bias_rng = make_rng(seed, "bias");
    std::normal_distribution<double> normal(0.0, 1.0);
    bias_.resize(devices_.size());
    for (auto& b : bias_)
        for (std::size_t p = 0; p < kPollutantCount; ++p) b[p] = noise_.bias_sigma[p] * normal(bias_rng);
}

void SensorModel::observe(const std::array<double, kPollutantCount>& truth, AlignedSeries& observed, std::size_t k) {
    for (std::size_t d = 0; d < devices_.size(); ++d) {
        const double w = devices_[d].weight;
        for (auto p : kAllPollutants) {
            const auto i = index_of(p);
            const double noise = noise_.sigma[i] * normal_(rng_);
            double v = truth[i] + (w - 1.0) * (truth[i] - baseline_[i]) + bias_[d][i] + noise;
            if (p == PollutantKind::Humidity)
                v = std::clamp(v, 0.0, 100.0);
            else if (p != PollutantKind::Temperature)
                v = std::max(v, 0.0);
            observed.channel(d, p)[k] = v;
        }
    }
}

AlignedSeries apply_sensor_model(const AlignedSeries& truth, const ZoneParams& params, const SensorNoise& noise,
                                 std::span<const DevicePlacement> devices, std::uint64_t seed) {
    std::vector<DeviceId> ids;
    for (const auto& d : devices) ids.push_back(d.id);
    AlignedSeries observed(ids, truth.t0(), truth.step(), truth.length());
    SensorModel model(params, noise, {devices.begin(), devices.end()}, seed);
    for (std::size_t k = 0; k < truth.length(); ++k) {
        std::array<double, kPollutantCount> cell{};
        for (auto p : kAllPollutants) cell[index_of(p)] = truth.channel(0, p)[k];
        model.observe(cell, observed, k);
    }
    return observed;
}

ScenarioRunner::ScenarioRunner(Scenario scenario, std::uint64_t seed)
    : scenario_((scenario.validate(), std::move(scenario))), state_(scenario_.initial),
      total_cells_(static_cast<std::size_t>(std::ceil(scenario_.duration))),
      seed_(seed), zone_(zone_for_day(scenario_.zone, seed, 0)), events_rng_(make_rng(seed, "scenario")),
      sensors_(scenario_.zone, scenario_.noise, scenario_.devices, seed) {
    state_.t = 0.0;
}

void ScenarioRunner::apply_event(const ScriptEvent& ev) {
    const auto& z = scenario_.zone;
    switch (ev.label) {
    case ActivityLabel::Enter:
        ++state_.occupancy;
        state_[PollutantKind::PM2_5] += z.pm25_enter_impulse;
        state_[PollutantKind::PM10] += z.pm10_enter_impulse;
        break;
    case ActivityLabel::Exit:
        state_.occupancy = std::max(0, state_.occupancy - 1);
        state_[PollutantKind::PM2_5] += z.pm_exit_factor * z.pm25_enter_impulse;
        state_[PollutantKind::PM10] += z.pm_exit_factor * z.pm10_enter_impulse;
        break;
    case ActivityLabel::FanOn: state_.fan = true; break;
    case ActivityLabel::FanOff: state_.fan = false; break;
    case ActivityLabel::AcOn: state_.ac = true; break;
    case ActivityLabel::AcOff: state_.ac = false; break;
    case ActivityLabel::Gathering: {
        std::uniform_int_distribution<int> size(static_cast<int>(z.gathering_min), static_cast<int>(z.gathering_max));
        std::uniform_real_distribution<double> length(z.gathering_min_duration, z.gathering_max_duration);
        const int persons = size(events_rng_);
        const double release = ev.t + length(events_rng_);
        state_.occupancy += persons;
        state_[PollutantKind::PM2_5] += persons * z.pm25_enter_impulse;
        state_[PollutantKind::PM10] += persons * z.pm10_enter_impulse;
        gatherings_.emplace_back(release, persons);
        break;
    }
    case ActivityLabel::Eating: state_.eating_remaining = std::max(state_.eating_remaining, z.eating_duration); break;
    }
}

ScenarioRunner::Chunk ScenarioRunner::advance(std::size_t cells) {
    const std::size_t n = std::min(cells, total_cells_ - cell_);
    const double t0 = scenario_.epoch + static_cast<double>(cell_);
    Chunk chunk{AlignedSeries({DeviceId("zone")}, t0, 1.0, n), AlignedSeries(scenario_.device_ids(), t0, 1.0, n)};
    const auto& script = scenario_.script;
    for (std::size_t i = 0; i < n; ++i, ++cell_) {
        const double t = static_cast<double>(cell_);
        if (const auto day = static_cast<std::size_t>(t / kDay); day != day_) {
            day_ = day;
            zone_ = zone_for_day(scenario_.zone, seed_, day);
        }
        for (auto it = gatherings_.begin(); it != gatherings_.end();) {
            if (it->first <= t) {
                state_.occupancy = std::max(0, state_.occupancy - it->second);
                it = gatherings_.erase(it);
            } else {
                ++it;
            }
        }
        while (next_event_ < script.size() && script[next_event_].t < t + 1.0) apply_event(script[next_event_++]);
        for (auto p : kAllPollutants) chunk.truth.channel(0, p)[i] = state_[p];
        sensors_.observe(state_.values, chunk.observed, i);
        state_ = step_zone(state_, zone_, 1.0);
    }
    return chunk;
}

SimulationResult simulate_scenario(const Scenario& sc, std::uint64_t seed) {
    ScenarioRunner runner(sc, seed);
    auto chunk = runner.advance(runner.total_cells());
    return {std::move(chunk.truth), std::move(chunk.observed), sc.annotations()};
}

std::map<ActivityLabel, std::size_t> lab_class_counts() {
    return {{ActivityLabel::Enter, 190}, {ActivityLabel::Exit, 185}, {ActivityLabel::FanOn, 95},
            {ActivityLabel::FanOff, 90}, {ActivityLabel::AcOn, 50},  {ActivityLabel::AcOff, 45},
            {ActivityLabel::Gathering, 25}, {ActivityLabel::Eating, 25}};
}

std::vector<DevicePlacement> lab_devices() {
    return {{DeviceId("door"), 1.0}, {DeviceId("fan"), 0.85}, {DeviceId("ac"), 0.7}, {DeviceId("desk"), 0.9}};
}

namespace {

struct LabState {
    int occupancy = 0;
    bool fan = false;
    bool ac = true;

    bool feasible(ActivityLabel l) const {
        if (needs_occupant(l) && occupancy == 0) return false;
        switch (l) {
        case ActivityLabel::Enter: return occupancy < 12;
        case ActivityLabel::FanOn: return !fan;
        case ActivityLabel::FanOff: return fan;
        case ActivityLabel::AcOn: return !ac;
        case ActivityLabel::AcOff: return ac;
        default: return true;
        }
    }

    void apply(ActivityLabel l) {
        switch (l) {
        case ActivityLabel::Enter: ++occupancy; break;
        case ActivityLabel::Exit: --occupancy; break;
        case ActivityLabel::FanOn: fan = true; break;
        case ActivityLabel::FanOff: fan = false; break;
        case ActivityLabel::AcOn: ac = true; break;
        case ActivityLabel::AcOff: ac = false; break;
        default: break;
        }
    }

    // Unannotated event that makes `l` possible.
    ActivityLabel prerequisite(ActivityLabel l) const {
        if (l == ActivityLabel::Enter) return ActivityLabel::Exit;
        if (occupancy == 0) return ActivityLabel::Enter;
        switch (l) {
        case ActivityLabel::FanOn: return ActivityLabel::FanOff;
        case ActivityLabel::FanOff: return ActivityLabel::FanOn;
        case ActivityLabel::AcOn: return ActivityLabel::AcOff;
        case ActivityLabel::AcOff: return ActivityLabel::AcOn;
        default: return ActivityLabel::Enter;
        }
    }
};

} // namespace

Scenario generate_scenario(const std::map<ActivityLabel, std::size_t>& class_counts, double duration,
                           std::uint64_t seed, const GeneratorOptions& opts) {
    if (!(duration >= 1.0)) throw Error(ErrorKind::Infeasible, "duration");
    if (!(opts.tau > 0.0) || opts.day_end <= opts.day_start) throw Error(ErrorKind::Infeasible, "options");

    Scenario sc;
    sc.duration = duration;
    sc.devices = lab_devices();
    sc.zone.day_temp_sigma = 1.5;
    sc.zone.day_rh_sigma = 8.0;
    sc.zone.day_co2_sigma = 25.0;
    sc.zone.day_voc_sigma = 15.0;
    sc.zone.day_pm_log_sigma = 0.5;
    sc.zone.day_lambda_log_sigma = 0.4;
    sc.initial = resting_state(sc.zone);
    sc.initial.ac = true;
    sc.initial[PollutantKind::Temperature] = sc.zone.ac_setpoint;
    sc.initial[PollutantKind::Humidity] = sc.zone.ac_rh;

    Rng rng = make_rng(seed, "scenario-plan");
    const auto days = static_cast<std::size_t>(std::ceil(duration / kDay));
    const double spacing = 2.0 * opts.tau;

    // Spread each label's count over the days.
    std::vector<std::array<std::size_t, kLabelCount>> quota(days, std::array<std::size_t, kLabelCount>{});
    for (auto label : kAllLabels) {
        auto it = class_counts.find(label);
        const std::size_t count = it == class_counts.end() ? 0 : it->second;
        const auto li = static_cast<std::size_t>(label);
        std::vector<std::size_t> order(days);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t d = 0; d < days; ++d) quota[d][li] = count / days;
        for (std::size_t r = 0; r < count % days; ++r) ++quota[order[r]][li];
    }

    LabState state;
    for (std::size_t day = 0; day < days; ++day) {
        const double base = static_cast<double>(day) * kDay;
        if (day > 0) {
            const double t = base + opts.night_reset;
            if (t < duration) {
                for (int i = 0; i < state.occupancy; ++i) sc.script.push_back({t, ActivityLabel::Exit, false});
                if (state.fan) sc.script.push_back({t, ActivityLabel::FanOff, false});
            }
            state.occupancy = 0;
            state.fan = false;
        }

        std::vector<ScriptEvent> plan;
        auto& q = quota[day];
        for (;;) {
            std::vector<double> weights(kLabelCount, 0.0);
            double total = 0.0;
            std::size_t pending = 0;
            for (std::size_t li = 0; li < kLabelCount; ++li) {
                pending += q[li];
                if (q[li] > 0 && state.feasible(kAllLabels[li])) weights[li] = static_cast<double>(q[li]);
                total += weights[li];
            }
            if (pending == 0) break;
            if (total == 0.0) {
                std::vector<double> want(q.begin(), q.end());
                std::discrete_distribution<std::size_t> pick(want.begin(), want.end());
                const auto fix = state.prerequisite(kAllLabels[pick(rng)]);
                state.apply(fix);
                plan.push_back({0.0, fix, false});
                continue;
            }
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            const auto li = pick(rng);
            state.apply(kAllLabels[li]);
            --q[li];
            plan.push_back({0.0, kAllLabels[li], true});
        }
        if (plan.empty()) continue;

        std::vector<double> slots;
        for (double t = base + opts.day_start + opts.tau; t + opts.tau <= base + opts.day_end && t + opts.tau <= duration;
             t += spacing)
            slots.push_back(t);
        if (slots.size() < plan.size())
            throw Error(ErrorKind::Infeasible, "day " + std::to_string(day),
                        std::to_string(plan.size()) + " events for " + std::to_string(slots.size()) + " slots");
        std::vector<double> chosen;
        std::sample(slots.begin(), slots.end(), std::back_inserter(chosen), plan.size(), rng);
        for (std::size_t i = 0; i < plan.size(); ++i) {
            plan[i].t = chosen[i];
            sc.script.push_back(plan[i]);
        }
    }
    std::stable_sort(sc.script.begin(), sc.script.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    sc.validate();
    return sc;
}

Preset parse_preset(std::string_view name) {
    if (name == "lab") return Preset::Lab;
    if (name == "exam") return Preset::Exam;
    if (name == "ac") return Preset::AirConditioning;
    if (name == "eating") return Preset::Eating;
    throw Error(ErrorKind::InvalidScenario, std::string(name), "unknown preset");
}

Scenario preset_scenario(Preset preset) {
    Scenario sc;
    sc.devices = lab_devices();
    switch (preset) {
    case Preset::Lab:
        sc.duration = kDay;
        sc.initial = resting_state(sc.zone);
        break;
    case Preset::Exam: {
        constexpr int students = 40;
        constexpr double exam = 2 * 3600.0 + 15 * 60.0;
        sc.zone.volume = 300.0;
        sc.zone.lambda_base = 5.0e-6; // split AC, windows shut
        sc.zone.co2_generation = calibrate_co2_generation(5000.0, sc.zone.co2_outdoor, students, exam, sc.zone);
        sc.duration = exam + 2 * 3600.0;
        sc.initial = resting_state(sc.zone);
        sc.initial.ac = true;
        sc.initial[PollutantKind::Temperature] = sc.zone.ac_setpoint;
        for (int i = 0; i < students; ++i) sc.script.push_back({0.0, ActivityLabel::Enter, true});
        for (int i = 0; i < students; ++i) sc.script.push_back({exam, ActivityLabel::Exit, true});
        break;
    }
    case Preset::AirConditioning:
        sc.duration = 600.0 + 3600.0;
        sc.initial = resting_state(sc.zone);
        sc.script.push_back({600.0, ActivityLabel::AcOn, true});
        break;
    case Preset::Eating:
        sc.duration = 600.0 + 2400.0;
        sc.initial = resting_state(sc.zone);
        sc.initial.occupancy = 1;
        sc.script.push_back({600.0, ActivityLabel::Eating, true});
        break;
    }
    return sc;
}

namespace {

struct ZoneField {
    const char* key;
    double ZoneParams::*member;
};

constexpr ZoneField kZoneFields[] = {
    {"volume", &ZoneParams::volume},
    {"co2_outdoor", &ZoneParams::co2_outdoor},
    {"lambda_base", &ZoneParams::lambda_base},
    {"lambda_fan", &ZoneParams::lambda_fan},
    {"co2_generation", &ZoneParams::co2_generation},
    {"ambient_temp", &ZoneParams::ambient_temp},
    {"ac_setpoint", &ZoneParams::ac_setpoint},
    {"kappa_on", &ZoneParams::kappa_on},
    {"kappa_off", &ZoneParams::kappa_off},
    {"ambient_rh", &ZoneParams::ambient_rh},
    {"ac_rh", &ZoneParams::ac_rh},
    {"rh_rate", &ZoneParams::rh_rate},
    {"voc_baseline", &ZoneParams::voc_baseline},
    {"voc_eating_rate", &ZoneParams::voc_eating_rate},
    {"voc_decay", &ZoneParams::voc_decay},
    {"eating_duration", &ZoneParams::eating_duration},
    {"pm25_baseline", &ZoneParams::pm25_baseline},
    {"pm10_baseline", &ZoneParams::pm10_baseline},
    {"pm_decay", &ZoneParams::pm_decay},
    {"pm25_enter_impulse", &ZoneParams::pm25_enter_impulse},
    {"pm10_enter_impulse", &ZoneParams::pm10_enter_impulse},
    {"pm_exit_factor", &ZoneParams::pm_exit_factor},
    {"pm25_fan_source", &ZoneParams::pm25_fan_source},
    {"pm10_fan_source", &ZoneParams::pm10_fan_source},
    {"gathering_min", &ZoneParams::gathering_min},
    {"gathering_max", &ZoneParams::gathering_max},
    {"gathering_min_duration", &ZoneParams::gathering_min_duration},
    {"gathering_max_duration", &ZoneParams::gathering_max_duration},
    {"day_temp_sigma", &ZoneParams::day_temp_sigma},
    {"day_rh_sigma", &ZoneParams::day_rh_sigma},
    {"day_co2_sigma", &ZoneParams::day_co2_sigma},
    {"day_voc_sigma", &ZoneParams::day_voc_sigma},
    {"day_pm_log_sigma", &ZoneParams::day_pm_log_sigma},
    {"day_lambda_log_sigma", &ZoneParams::day_lambda_log_sigma},
};

void read_per_pollutant(const ConfigSection* sec, std::array<double, kPollutantCount>& out) {
    if (!sec) return;
    for (const auto& [key, value] : sec->entries) {
        auto p = pollutant_from_token(key);
        auto v = parse_real(value);
        if (!p || !v) throw Error(ErrorKind::MalformedRecord, sec->name + "." + key);
        out[index_of(*p)] = *v;
    }
}

void write_per_pollutant(std::ostream& out, const char* name, const std::array<double, kPollutantCount>& v) {
    out << "\n[" << name << "]\n";
    for (auto p : kAllPollutants) out << token(p) << " = " << format_real(v[index_of(p)]) << "\n";
}

} // namespace

Scenario scenario_from_config(const Config& cfg, std::uint64_t seed) {
    const auto* head = cfg.section("scenario");
    Scenario sc = preset_scenario(parse_preset(head ? head->get("preset", "lab") : "lab"));

    if (const auto* gen = cfg.section("generate")) {
        std::map<ActivityLabel, std::size_t> counts;
        for (const auto& [key, value] : gen->entries) {
            if (key == "days" || key == "tau") continue;
            auto n = parse_real(value);
            if (!n || *n < 0) throw Error(ErrorKind::MalformedRecord, "generate." + key);
            counts[parse_activity_label(key)] = static_cast<std::size_t>(*n);
        }
        GeneratorOptions opts;
        opts.tau = gen->get_real("tau", opts.tau);
        sc = generate_scenario(counts, gen->get_real("days", 1.0) * kDay, seed, opts);
    }
    if (head) {
        sc.duration = head->get_real("duration", sc.duration);
        sc.epoch = head->get_real("epoch", sc.epoch);
    }
    if (const auto* zone = cfg.section("zone")) {
        for (const auto& f : kZoneFields) sc.zone.*f.member = zone->get_real(f.key, sc.zone.*f.member);
        if (zone->find("co2_generation") == nullptr && zone->get("calibrate", "") == "exam")
            sc.zone.co2_generation = calibrate_co2_generation(5000.0, sc.zone.co2_outdoor, 40, 8100.0, sc.zone);
    }
    if (const auto* init = cfg.section("initial")) {
        if (!head || head->find("preset") == nullptr) sc.initial = resting_state(sc.zone);
        for (auto p : kAllPollutants) sc.initial[p] = init->get_real(std::string(token(p)), sc.initial[p]);
        sc.initial.occupancy = static_cast<int>(init->get_int("occupancy", sc.initial.occupancy));
        sc.initial.fan = init->get_bool("fan", sc.initial.fan);
        sc.initial.ac = init->get_bool("ac", sc.initial.ac);
    }
    if (const auto* devs = cfg.section("devices")) {
        sc.devices.clear();
        for (const auto& [key, value] : devs->entries) {
            auto w = parse_real(value);
            if (!w) throw Error(ErrorKind::MalformedRecord, "devices." + key);
            sc.devices.push_back({DeviceId(key), *w});
        }
    }
    read_per_pollutant(cfg.section("noise"), sc.noise.sigma);
    read_per_pollutant(cfg.section("bias"), sc.noise.bias_sigma);
    read_per_pollutant(cfg.section("margin"), sc.noise.margin);
    if (const auto* script = cfg.section("script")) {
        sc.script.clear();
        for (const auto& line : script->lines) {
            std::istringstream is(line);
            std::string t_text, label, flag;
            is >> t_text >> label >> flag;
            auto t = parse_real(t_text);
            if (!t || label.empty() || (!flag.empty() && flag != "silent"))
                throw Error(ErrorKind::MalformedRecord, "script", line);
            sc.script.push_back({*t, parse_activity_label(label), flag.empty()});
        }
        std::stable_sort(sc.script.begin(), sc.script.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    }
    sc.validate();
    return sc;
}

void write_scenario(std::ostream& out, const Scenario& sc) {
    out << "[scenario]\n"
        << "duration = " << format_real(sc.duration) << "\n"
        << "epoch = " << format_real(sc.epoch) << "\n"
        << "\n[zone]\n";
    for (const auto& f : kZoneFields) out << f.key << " = " << format_real(sc.zone.*f.member) << "\n";
    out << "\n[initial]\n";
    for (auto p : kAllPollutants) out << token(p) << " = " << format_real(sc.initial[p]) << "\n";
    out << "occupancy = " << sc.initial.occupancy << "\n"
        << "fan = " << (sc.initial.fan ? "true" : "false") << "\n"
        << "ac = " << (sc.initial.ac ? "true" : "false") << "\n"
        << "\n[devices]\n";
    for (const auto& d : sc.devices) out << d.id.str() << " = " << format_real(d.weight) << "\n";
    write_per_pollutant(out, "noise", sc.noise.sigma);
    write_per_pollutant(out, "bias", sc.noise.bias_sigma);
    write_per_pollutant(out, "margin", sc.noise.margin);
    out << "\n[script]\n";
    for (const auto& ev : sc.script)
        out << format_real(ev.t) << " " << to_text(ev.label) << (ev.annotated ? "" : " silent") << "\n";
}

double inter_device_gap(const AlignedSeries& observed, std::size_t a, std::size_t b, PollutantKind p) {
    const auto x = observed.channel(a, p);
    const auto y = observed.channel(b, p);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (is_missing(x[k]) || is_missing(y[k])) continue;
        sum += std::abs(x[k] - y[k]);
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

} // namespace airshadow
