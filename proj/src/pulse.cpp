#include "msgate/pulse.hpp"

#include <cmath>
#include <string>

#include "msgate/errors.hpp"

namespace msgate {

PulseProgram::PulseProgram(std::vector<Segment> segments, double scale)
    : segments_(std::move(segments)), scale_(scale), total_duration_(0.0) {
    if (segments_.empty()) throw ValidationError("pulse: at least one segment required");
    if (!(scale_ >= 0.0) || !std::isfinite(scale_))
        throw ValidationError("pulse: scale must be finite and >= 0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (!(s.duration > 0.0) || !std::isfinite(s.duration))
            throw ValidationError("pulse: segment " + std::to_string(i) +
                                  " duration must be > 0");
        if (s.amplitude < 0.0 || !std::isfinite(s.amplitude))
            throw ValidationError("pulse: segment " + std::to_string(i) +
                                  " amplitude must be >= 0");
        if (!std::isfinite(s.detuning))
            throw ValidationError("pulse: segment " + std::to_string(i) +
                                  " detuning must be finite");
        total_duration_ += s.duration;
    }
}

double integrated_phase(const PulseProgram& pulse, double mode_freq, double t) {
    if (t < 0.0 || t > pulse.total_duration() * (1.0 + 1e-12))
        throw ValidationError("integrated_phase: t outside [0, total duration]");
    double theta = 0.0;
    double start = 0.0;
    for (const Segment& s : pulse.segments()) {
        const double end = start + s.duration;
        const double dt = std::min(t, end) - start;
        if (dt <= 0.0) break;
        theta += (mode_freq - s.detuning) * dt;
        start = end;
    }
    return theta;
}

PulseProgram mirror_pulse(const PulseProgram& pulse, double omega1, double omega2) {
    std::vector<Segment> segs = pulse.segments();
    const double sum = omega1 + omega2;
    for (Segment& s : segs) s.detuning = sum - s.detuning;
    return PulseProgram(std::move(segs), pulse.scale());
}

PulseProgram concatenate(const PulseProgram& first, const PulseProgram& second) {
    std::vector<Segment> segs;
    segs.reserve(first.size() + second.size());
    for (Segment s : first.segments()) {
        s.amplitude *= first.scale();
        segs.push_back(s);
    }
    for (Segment s : second.segments()) {
        s.amplitude *= second.scale();
        segs.push_back(s);
    }
    return PulseProgram(std::move(segs), 1.0);
}

PulseProgram repeat_pulse(const PulseProgram& pulse, int count) {
    if (count < 1) throw ValidationError("repeat_pulse: count must be >= 1");
    std::vector<Segment> segs;
    segs.reserve(pulse.size() * count);
    for (int r = 0; r < count; ++r) {
        for (Segment s : pulse.segments()) {
            s.amplitude *= pulse.scale();
            segs.push_back(s);
        }
    }
    return PulseProgram(std::move(segs), 1.0);
}

PulseProgram scale_amplitude(const PulseProgram& pulse, double beta) {
    if (beta < 0.0 || !std::isfinite(beta))
        throw ValidationError("scale_amplitude: beta must be finite and >= 0");
    return PulseProgram(pulse.segments(), pulse.scale() * beta);
}

PulseProgram apply_offset(const PulseProgram& pulse, DetuningOffset offset) {
    std::vector<Segment> segs = pulse.segments();
    for (Segment& s : segs) s.detuning -= offset.epsilon;
    return PulseProgram(std::move(segs), pulse.scale());
}

}  // namespace msgate
