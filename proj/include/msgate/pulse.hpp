#pragma once

#include <cstddef>
#include <vector>

namespace msgate {

// One piecewise-constant slice of the drive: duration (s), detuning from the
// carrier (rad/s, sits near the mode frequencies) and carrier Rabi frequency
// (rad/s). The effective amplitude of a segment is scale * amplitude.
struct Segment {
    double duration = 0.0;   // s, > 0
    double detuning = 0.0;   // rad/s
    double amplitude = 0.0;  // rad/s, >= 0
};

// Uniform additive offset on all mode frequencies; equivalently subtracted
// from the drive detuning. Signed.
struct DetuningOffset {
    double epsilon = 0.0;  // rad/s
};

// Ordered piecewise-constant FM/AM pulse with a global amplitude multiplier.
// The scale is kept separate from the per-segment amplitudes so AM factors
// applied by the composite constructions stay exactly representable.
class PulseProgram {
public:
    PulseProgram(std::vector<Segment> segments, double scale = 1.0);

    const std::vector<Segment>& segments() const { return segments_; }
    double scale() const { return scale_; }
    double total_duration() const { return total_duration_; }
    std::size_t size() const { return segments_.size(); }

    // Effective Rabi frequency of segment i, scale folded in.
    double effective_amplitude(std::size_t i) const { return scale_ * segments_[i].amplitude; }

private:
    std::vector<Segment> segments_;
    double scale_;
    double total_duration_;
};

// theta_k(t) = omega_k * t - integral of delta up to t; exact piecewise-linear
// evaluation from segment boundaries. t must lie in [0, total duration].
double integrated_phase(const PulseProgram& pulse, double mode_freq, double t);

// Reflect all detunings about (omega1 + omega2)/2: delta -> omega1 + omega2 - delta.
// Durations, amplitudes and scale are preserved. Involution.
PulseProgram mirror_pulse(const PulseProgram& pulse, double omega1, double omega2);

// Segment list of `first` then `second`, each segment's amplitude pre-multiplied
// by its source program's scale; result scale = 1.
PulseProgram concatenate(const PulseProgram& first, const PulseProgram& second);

// `count` copies of `pulse` back to back (phase-continuous repetition).
PulseProgram repeat_pulse(const PulseProgram& pulse, int count);

// Multiply the global scale by beta >= 0. Rotation angle scales as beta^2.
PulseProgram scale_amplitude(const PulseProgram& pulse, double beta);

// delta_i -> delta_i - epsilon on every segment, equivalent to shifting all
// mode frequencies by +epsilon.
PulseProgram apply_offset(const PulseProgram& pulse, DetuningOffset offset);

}  // namespace msgate
