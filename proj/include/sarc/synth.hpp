#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <utility>
#include <string>
#include <vector>

#include "sarc/data_model.hpp"
#include "sarc/parallel.hpp"
#include "sarc/random.hpp"

namespace sarc {

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t n_subjects = 20;
  std::size_t reps_per_set = 20;
  double rep_period_min = 0.9;  // seconds
  double rep_period_max = 4.3;
  double accel_noise_std = 0.02;  // g
  double gyro_noise_std = 0.05;   // rad/s
  double subject_shift_strength = 0.5;
  double rep_variability = 0.06;  // relative rep-to-rep amplitude spread within a set
  double rest_padding = 15.0;     // seconds before and after the active portion
  double fs_hz = kDefaultSampleRateHz;

  void validate() const {
    require(n_subjects >= 1, "n_subjects must be >= 1");
    require(reps_per_set >= 1, "reps_per_set must be >= 1");
    require(rep_period_min >= 0.5 && rep_period_max <= 10.0 && rep_period_min <= rep_period_max,
            "rep period range must lie within [0.5, 10] s");
    require(accel_noise_std >= 0.0 && gyro_noise_std >= 0.0, "noise_std must be >= 0");
    require(subject_shift_strength >= 0.0 && subject_shift_strength <= 1.0, "subject_shift_strength must be in [0, 1]");
    require(rep_variability >= 0.0 && rep_variability < 0.5, "rep_variability must be in [0, 0.5)");
    require(rest_padding >= 0.0, "rest_padding must be >= 0");
    require(fs_hz > 0.0, "fs_hz must be positive");
  }
};

struct SynthDataset {
  std::vector<Recording> recordings;
  Manifest manifest;
  /// Generator ground truth: the active portion of each recording.
  std::vector<Interval> active_spans;
};

namespace synth_detail {

using Vec3 = std::array<double, 3>;
inline constexpr std::size_t kHarmonics = 3;

/// Harmonic signal template of one exercise class, in the right-arm watch frame.
struct ClassTemplate {
  double period = 2.0;
  Vec3 gravity{0, -1, 0};
  std::array<std::array<double, kHarmonics>, 3> accel_amp{};
  std::array<std::array<double, kHarmonics>, 3> accel_phase{};
  std::array<std::array<double, kHarmonics>, 3> gyro_amp{};
  std::array<std::array<double, kHarmonics>, 3> gyro_phase{};

};

inline Vec3 normalized(Vec3 v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

/// Rodrigues rotation of v about unit axis k by angle th.
inline Vec3 rotate(const Vec3& v, const Vec3& k, double th) {
  const double c = std::cos(th), s = std::sin(th);
  const double kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
  const Vec3 kxv{k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]};
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = v[i] * c + kxv[i] * s + k[i] * kv * (1 - c);
  return out;
}

/// Rotates every harmonic component of a template (the coefficient vectors of
/// sin and cos terms rotate linearly with the frame).
inline ClassTemplate rotate_template(const ClassTemplate& t, const Vec3& axis, double th) {
  ClassTemplate out = t;
  out.gravity = rotate(t.gravity, axis, th);
  auto rot_block = [&](const auto& amp, const auto& phase, auto& amp_out, auto& phase_out) {
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      Vec3 s{}, c{};
      for (int ax = 0; ax < 3; ++ax) {
        s[ax] = amp[ax][h] * std::cos(phase[ax][h]);
        c[ax] = amp[ax][h] * std::sin(phase[ax][h]);
      }
      s = rotate(s, axis, th);
      c = rotate(c, axis, th);
      for (int ax = 0; ax < 3; ++ax) {
        amp_out[ax][h] = std::hypot(s[ax], c[ax]);
        phase_out[ax][h] = std::atan2(c[ax], s[ax]);
      }
    }
  };
  rot_block(t.accel_amp, t.accel_phase, out.accel_amp, out.accel_phase);
  rot_block(t.gyro_amp, t.gyro_phase, out.gyro_amp, out.gyro_phase);
  return out;
}

/// Time reversal with the rotation sense flipped: a(t) -> a(-t), w(t) -> -w(-t).
inline ClassTemplate mirror_template(const ClassTemplate& t) {
  ClassTemplate out = t;
  for (int ax = 0; ax < 3; ++ax)
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      out.accel_phase[ax][h] = std::numbers::pi - t.accel_phase[ax][h];
      out.gyro_phase[ax][h] = -t.gyro_phase[ax][h];
    }
  return out;
}

using Harmonics = std::array<std::array<double, kHarmonics>, 3>;

/// Cosine and sine coefficient vectors of harmonic h.
inline std::pair<Vec3, Vec3> coefficients(const Harmonics& amp, const Harmonics& phase, std::size_t h) {
  Vec3 s{}, c{};
  for (int ax = 0; ax < 3; ++ax) {
    s[ax] = amp[ax][h] * std::cos(phase[ax][h]);
    c[ax] = amp[ax][h] * std::sin(phase[ax][h]);
  }
  return {s, c};
}

inline void set_coefficients(Harmonics& amp, Harmonics& phase, std::size_t h, const Vec3& s, const Vec3& c) {
  for (int ax = 0; ax < 3; ++ax) {
    amp[ax][h] = std::hypot(s[ax], c[ax]);
    phase[ax][h] = std::atan2(c[ax], s[ax]);
  }
}

/// Rescales the harmonics to the given mean-square accelerometer and gyro energies.
inline void scale_energy(ClassTemplate& t, double accel_energy, double gyro_energy) {
  double ea = 0.0, eg = 0.0;
  for (int ax = 0; ax < 3; ++ax)
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      ea += 0.5 * t.accel_amp[ax][h] * t.accel_amp[ax][h];
      eg += 0.5 * t.gyro_amp[ax][h] * t.gyro_amp[ax][h];
    }
  const double sa = std::sqrt(accel_energy / ea), sg = std::sqrt(gyro_energy / eg);
  for (int ax = 0; ax < 3; ++ax)
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      t.accel_amp[ax][h] *= sa;
      t.gyro_amp[ax][h] *= sg;
    }
}

/// Base template drawn from a fixed stream so the class geometry does not depend on the dataset seed.
inline ClassTemplate base_template(std::uint64_t tag, double period, Vec3 gravity, double accel_energy,
                                   double gyro_energy) {
  Rng rng(0x5a17c0de, {tag});
  ClassTemplate t;
  t.period = period;
  t.gravity = normalized(gravity);
  const std::array<double, kHarmonics> falloff{1.0, 0.55, 0.3};
  for (int ax = 0; ax < 3; ++ax)
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      t.accel_amp[ax][h] = falloff[h] * rng.uniform(0.3, 1.0);
      t.accel_phase[ax][h] = rng.uniform(-std::numbers::pi, std::numbers::pi);
      t.gyro_amp[ax][h] = falloff[h] * rng.uniform(0.3, 1.0);
      t.gyro_phase[ax][h] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
  // Keep the dynamic acceleration orthogonal to gravity so |a|^2 has no
  // gravity cross term and stays level through a set.
  for (std::size_t h = 0; h < kHarmonics; ++h) {
    auto [s, c] = coefficients(t.accel_amp, t.accel_phase, h);
    for (Vec3* v : {&s, &c}) {
      const double gv = t.gravity[0] * (*v)[0] + t.gravity[1] * (*v)[1] + t.gravity[2] * (*v)[2];
      for (int ax = 0; ax < 3; ++ax) (*v)[ax] -= gv * t.gravity[ax];
    }
    set_coefficients(t.accel_amp, t.accel_phase, h, s, c);
  }
  scale_energy(t, accel_energy, gyro_energy);
  return t;
}

/// Rotation about one fixed axis: the gyro signal is axis * omega(t) and the
/// dynamic acceleration lies along one direction in quadrature with it, both
/// with odd harmonics only. Such a template and its mirror image produce the
/// same window statistics; `generic` mixes in a base template so the pair
/// stays separable.
inline ClassTemplate rotation_template(std::uint64_t tag, double period, Vec3 gravity, double accel_energy,
                                       double gyro_energy, double generic) {
  const ClassTemplate base = base_template(tag, period, gravity, accel_energy, gyro_energy);
  Rng rng(0x0707a7e, {tag});
  const Vec3 axis = normalized({rng.normal(), rng.normal(), rng.normal()});
  Vec3 u = normalized({rng.normal(), rng.normal(), rng.normal()});
  const double gu = u[0] * base.gravity[0] + u[1] * base.gravity[1] + u[2] * base.gravity[2];
  for (int ax = 0; ax < 3; ++ax) u[ax] -= gu * base.gravity[ax];
  u = normalized(u);
  const std::array<double, kHarmonics> amp{1.0, 0.0, 0.35};
  ClassTemplate t = base;
  for (std::size_t h = 0; h < kHarmonics; ++h) {
    const double psi = rng.uniform(-std::numbers::pi, std::numbers::pi);
    auto [gs, gc] = coefficients(base.gyro_amp, base.gyro_phase, h);
    auto [as, ac] = coefficients(base.accel_amp, base.accel_phase, h);
    for (int ax = 0; ax < 3; ++ax) {
      gs[ax] = generic * gs[ax] + (1 - generic) * amp[h] * axis[ax] * std::cos(psi);
      gc[ax] = generic * gc[ax] + (1 - generic) * amp[h] * axis[ax] * std::sin(psi);
      as[ax] = generic * as[ax] + (1 - generic) * amp[h] * u[ax] * std::cos(psi - std::numbers::pi / 2);
      ac[ax] = generic * ac[ax] + (1 - generic) * amp[h] * u[ax] * std::sin(psi - std::numbers::pi / 2);
    }
    set_coefficients(t.gyro_amp, t.gyro_phase, h, gs, gc);
    set_coefficients(t.accel_amp, t.accel_phase, h, as, ac);
  }
  scale_energy(t, accel_energy, gyro_energy);
  return t;
}

/// One template per class. FEL is ABD seen through a small frame rotation and
/// ER is the mirror image of IR; both pairs are meant to be confusable.
inline constexpr double kRotationGeneric = 0.35;

inline const std::array<ClassTemplate, kNumClasses>& class_templates() {
  static const std::array<ClassTemplate, kNumClasses> templates = [] {
    std::array<ClassTemplate, kNumClasses> t{};
    t[0] = base_template(0, 1.7, {0.1, -0.95, 0.3}, 4.2, 2.0);   // PEN
    t[1] = base_template(1, 2.5, {0.6, -0.5, 0.6}, 4.8, 3.0);    // ABD
    t[2] = rotate_template(t[1], normalized({0.2, 1.0, 0.1}), 0.30);  // FEL
    t[3] = rotation_template(3, 2.0, {0.25, -0.3, 0.92}, 4.5, 4.0, kRotationGeneric);  // IR
    t[4] = mirror_template(t[3]);                                 // ER
    t[5] = base_template(5, 2.2, {-0.5, -0.7, -0.5}, 4.4, 2.5);  // TRAP
    t[6] = base_template(6, 2.8, {0.05, 0.3, -0.95}, 5.0, 2.2);  // ROW
    return t;
  }();
  return templates;
}

inline std::string subject_name(std::size_t i, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, n >= 100 ? "S%03zu" : "S%02zu", i + 1);
  return buf;
}

enum StreamTag : std::uint64_t {
  kSubjectGlobal = 1,
  kSubjectClass = 2,
  kRepShared = 3,
  kRepSubject = 4,
  kNoise = 5,
};

struct RecordingResult {
  Recording rec;
  Interval active;
};

inline RecordingResult generate_recording(const SynthConfig& cfg, std::size_t subject, ExerciseClass cls, Side side) {
  const auto ci = static_cast<std::uint64_t>(cls);
  const auto si = static_cast<std::uint64_t>(side);
  const double s = cfg.subject_shift_strength;
  ClassTemplate t = class_templates()[ci];

  // Per-subject perturbation: a global component shared across the subject's
  // sets plus a set-specific component.
  Rng g(cfg.seed, {kSubjectGlobal, subject});
  Rng sc(cfg.seed, {kSubjectClass, subject, ci, si});
  const double period_factor = std::exp(s * (0.30 * g.normal() + 0.10 * sc.normal()));
  std::array<double, 3> amp_global{}, gyro_global{};
  for (auto& v : amp_global) v = g.normal();
  for (auto& v : gyro_global) v = g.normal();
  const Vec3 tilt_axis_g = normalized({g.normal(), g.normal(), g.normal()});
  const double tilt_g = g.normal();
  for (int ax = 0; ax < 3; ++ax) {
    const double fa = std::exp(s * (0.25 * amp_global[ax] + 0.20 * sc.normal()));
    const double fg = std::exp(s * (0.25 * gyro_global[ax] + 0.20 * sc.normal()));
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      t.accel_amp[ax][h] *= fa;
      t.gyro_amp[ax][h] *= fg;
      t.accel_phase[ax][h] += s * 0.6 * sc.normal();
      t.gyro_phase[ax][h] += s * 0.6 * sc.normal();
    }
  }
  const Vec3 tilt_axis_c = normalized({sc.normal(), sc.normal(), sc.normal()});
  t = rotate_template(t, tilt_axis_g, s * 0.25 * tilt_g);
  t = rotate_template(t, tilt_axis_c, s * 0.20 * sc.normal());
  const double period = std::clamp(t.period * period_factor, cfg.rep_period_min, cfg.rep_period_max);

  // Rep-to-rep variation. With zero subject shift every subject shares the
  // same sequence, so recordings differ only by sensor noise.
  const std::size_t reps = cfg.reps_per_set;
  Rng rs(cfg.seed, {kRepShared, ci, si});
  Rng rj(cfg.seed, {kRepSubject, subject, ci, si});
  const double norm = std::sqrt((1 - s) * (1 - s) + s * s);
  std::vector<double> rep_amp(reps + 1), rep_len(reps);
  for (std::size_t r = 0; r <= reps; ++r) {
    const double z = ((1 - s) * rs.normal() + s * rj.normal()) / norm;
    rep_amp[r] = std::max(0.3, 1.0 + cfg.rep_variability * z);
  }
  for (std::size_t r = 0; r < reps; ++r) {
    const double z = ((1 - s) * rs.normal() + s * rj.normal()) / norm;
    rep_len[r] = period * std::max(0.5, 1.0 + 0.5 * cfg.rep_variability * z);
  }

  const double fs = cfg.fs_hz;
  const auto pad = static_cast<std::size_t>(std::llround(cfg.rest_padding * fs));
  std::vector<double> rep_start(reps + 1, 0.0);
  for (std::size_t r = 0; r < reps; ++r) rep_start[r + 1] = rep_start[r] + rep_len[r];
  const auto n_active = static_cast<std::size_t>(std::llround(rep_start[reps] * fs));
  const std::size_t total = pad + n_active + pad;

  // Left-arm recordings see the right-arm motion reflected through the x axis:
  // a -> (-ax, ay, az), and the pseudovector w -> (wx, -wy, -wz).
  const Vec3 a_sign = side == Side::LEFT ? Vec3{-1, 1, 1} : Vec3{1, 1, 1};
  const Vec3 w_sign = side == Side::LEFT ? Vec3{1, -1, -1} : Vec3{1, 1, 1};
  const Vec3 rest_gravity{0.0, -1.0, 0.0};

  std::array<Rng, kNumChannels> noise{
      Rng(cfg.seed, {kNoise, subject, ci, si, 0}), Rng(cfg.seed, {kNoise, subject, ci, si, 1}),
      Rng(cfg.seed, {kNoise, subject, ci, si, 2}), Rng(cfg.seed, {kNoise, subject, ci, si, 3}),
      Rng(cfg.seed, {kNoise, subject, ci, si, 4}), Rng(cfg.seed, {kNoise, subject, ci, si, 5})};

  Recording rec;
  rec.subject_id = subject_name(subject, cfg.n_subjects);
  rec.exercise = cls;
  rec.side = side;
  rec.fs_hz = fs;
  rec.id = rec.subject_id + "/" + rec.subject_id + "_" + std::string(to_string(cls)) + "_" +
           std::string(to_string(side)) + ".csv";
  rec.samples.resize(total);

  std::size_t rep = 0;
  for (std::size_t i = 0; i < total; ++i) {
    SensorSample& smp = rec.samples[i];
    smp.t = quantize9(static_cast<double>(i) / fs);
    Vec3 a{}, w{};
    if (i >= pad && i < pad + n_active) {
      const double tt = static_cast<double>(i - pad) / fs;
      while (rep + 1 < reps && tt >= rep_start[rep + 1]) ++rep;
      const double progress = std::clamp((tt - rep_start[rep]) / rep_len[rep], 0.0, 1.0);
      const double phi = 2.0 * std::numbers::pi * (static_cast<double>(rep) + progress);
      const double amp = rep_amp[rep] + (rep_amp[rep + 1] - rep_amp[rep]) * progress;
      for (int ax = 0; ax < 3; ++ax) {
        double da = 0.0, dw = 0.0;
        for (std::size_t h = 0; h < kHarmonics; ++h) {
          const double hp = static_cast<double>(h + 1) * phi;
          da += t.accel_amp[ax][h] * std::sin(hp + t.accel_phase[ax][h]);
          dw += t.gyro_amp[ax][h] * std::sin(hp + t.gyro_phase[ax][h]);
        }
        a[ax] = t.gravity[ax] + amp * da;
        w[ax] = amp * dw;
      }
    } else {
      a = rest_gravity;
    }
    for (int ax = 0; ax < 3; ++ax) {
      smp.a[ax] = quantize9(a_sign[ax] * a[ax] + cfg.accel_noise_std * noise[ax].normal());
      smp.w[ax] = quantize9(w_sign[ax] * w[ax] + cfg.gyro_noise_std * noise[3 + ax].normal());
    }
  }
  return {std::move(rec), Interval{pad, pad + n_active}};
}

}  // namespace synth_detail

/// Deterministic stand-in dataset: one recording per (subject, class, side),
/// in subject-major, class, then side (R before L) order.
inline SynthDataset generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t per_subject = kNumClasses * 2;
  const std::size_t n = cfg.n_subjects * per_subject;
  std::vector<synth_detail::RecordingResult> results(n);
  parallel_for(n, [&](std::size_t i) {
    const std::size_t subject = i / per_subject;
    const std::size_t rem = i % per_subject;
    const auto cls = kAllClasses[rem / 2];
    const Side side = rem % 2 == 0 ? Side::RIGHT : Side::LEFT;
    results[i] = synth_detail::generate_recording(cfg, subject, cls, side);
  });
  SynthDataset ds;
  ds.manifest.fs_hz = cfg.fs_hz;
  ds.recordings.reserve(n);
  for (auto& r : results) {
    ds.manifest.files.push_back(manifest_entry(r.rec));
    ds.active_spans.push_back(r.active);
    ds.recordings.push_back(std::move(r.rec));
  }
  return ds;
}

}  // namespace sarc
