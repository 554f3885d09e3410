#include "mret/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "mret/errors.hpp"

namespace mret {

void SyntheticSpec::check() const {
  if (groups < 2) throw ValidationError("synthetic dataset needs groups >= 2");
  if (per_group < 2) throw ValidationError("synthetic dataset needs per_group >= 2");
  if (layout == SyntheticLayout::kTriplet && per_group < 3) {
    throw ValidationError("triplet layout needs per_group >= 3 (reference, positive, >= 1 negative)");
  }
  if (frames < 2 || patches < 1 || dim < 1) throw ValidationError("synthetic tensors need T >= 2, P >= 1, d >= 1");
  if (layout == SyntheticLayout::kLabeled && styles < 1) throw ValidationError("styles must be >= 1");
  for (double v : {appearance_confound, motion_signal, noise}) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("synthetic amplitudes must be finite and >= 0");
  }
}

namespace {

struct Motion {
  std::vector<double> profile;  // a_m, one weight per channel
  double skew = 0.0;            // harmonic mix that makes w_m asymmetric
  int cycles = 1;
};

struct Appearance {
  std::vector<double> values;   // P x d
  std::vector<double> mask;     // P, 1 on the moving object
};

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec) : spec_(spec), rng_(spec.seed) {}

  Motion motion() {
    Motion m;
    m.profile.resize(spec_.dim);
    for (auto& v : m.profile) v = normal_(rng_);
    std::uniform_real_distribution<double> mag(0.3, 0.9);
    m.skew = mag(rng_) * (coin_(rng_) ? 1.0 : -1.0);
    m.cycles = coin_(rng_) ? 2 : 1;
    return m;
  }

  Appearance appearance() {
    Appearance a;
    a.values.resize(spec_.patches * spec_.dim);
    for (auto& v : a.values) v = normal_(rng_);
    a.mask.assign(spec_.patches, 0.0);
    std::uniform_int_distribution<std::size_t> start(0, spec_.patches - 1);
    const auto s = start(rng_);
    const auto len = (spec_.patches + 1) / 2;
    for (std::size_t k = 0; k < len; ++k) a.mask[(s + k) % spec_.patches] = 1.0;
    return a;
  }

  std::vector<double> fresh_values() {
    std::vector<double> v(spec_.patches * spec_.dim);
    for (auto& x : v) x = normal_(rng_);
    return v;
  }

  std::vector<double> fresh_channel_offset() {
    std::vector<double> v(spec_.dim);
    for (auto& x : v) x = normal_(rng_);
    return v;
  }

  double phase() { return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng_); }

  /// Renders one clip; consumes noise draws in a fixed order.
  FeatureTensor render(const std::string& id, const Appearance& look, const Motion& motion, double amplitude,
                       double phase) {
    FeatureTensor t(id, spec_.frames, spec_.patches, spec_.dim);
    std::vector<double> jitter(spec_.patches * spec_.dim);
    for (auto& j : jitter) j = 0.1 * normal_(rng_);
    for (std::size_t f = 0; f < spec_.frames; ++f) {
      const double theta =
          2.0 * std::numbers::pi * motion.cycles * static_cast<double>(f) / static_cast<double>(spec_.frames) + phase;
      const double w = std::sin(theta) + motion.skew * std::cos(2.0 * theta);
      for (std::size_t p = 0; p < spec_.patches; ++p) {
        for (std::size_t c = 0; c < spec_.dim; ++c) {
          const auto i = p * spec_.dim + c;
          const double v = spec_.appearance_confound * (look.values[i] + jitter[i]) +
                           spec_.motion_signal * amplitude * look.mask[p] * motion.profile[c] * w +
                           spec_.noise * normal_(rng_);
          t.at(f, p, c) = static_cast<float>(v);
        }
      }
    }
    return t;
  }

 private:
  const SyntheticSpec& spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::bernoulli_distribution coin_{0.5};
};

std::string id_of(const char* fmt, std::size_t a, std::size_t b = 0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

/// Positive's appearance under each edit category, derived from the reference look.
Appearance edited_look(Generator& gen, const Appearance& ref, Category category, std::size_t patches,
                       std::size_t dim) {
  Appearance out = ref;
  switch (category) {
    case Category::kStatic:
    case Category::kDynApp:
    case Category::kDynObj: {
      // Static edits the background; the other two edit the moving subject.
      const bool edit_object = category != Category::kStatic;
      const auto fresh = gen.fresh_values();
      for (std::size_t p = 0; p < patches; ++p) {
        const bool on_object = ref.mask[p] > 0.0;
        if (on_object != edit_object) continue;
        for (std::size_t c = 0; c < dim; ++c) out.values[p * dim + c] = fresh[p * dim + c];
      }
      break;
    }
    case Category::kView: {
      // New viewpoint: the scene and subject land on other patches.
      const auto shift = std::max<std::size_t>(1, patches / 4);
      for (std::size_t p = 0; p < patches; ++p) {
        const auto q = (p + shift) % patches;
        out.mask[q] = ref.mask[p];
        for (std::size_t c = 0; c < dim; ++c) out.values[q * dim + c] = ref.values[p * dim + c];
      }
      break;
    }
    case Category::kStyle: {
      const auto offset = gen.fresh_channel_offset();
      for (std::size_t p = 0; p < patches; ++p) {
        for (std::size_t c = 0; c < dim; ++c) out.values[p * dim + c] += offset[c];
      }
      break;
    }
    case Category::kNone: break;
  }
  return out;
}

}  // namespace

std::vector<SyntheticVideo> synthesize(const SyntheticSpec& spec) {
  spec.check();
  Generator gen(spec);
  std::vector<SyntheticVideo> out;

  if (spec.layout == SyntheticLayout::kTriplet) {
    const auto negatives = spec.per_group - 2;
    std::vector<Motion> motions;
    std::vector<Appearance> looks;
    for (std::size_t g = 0; g < spec.groups; ++g) motions.push_back(gen.motion());
    for (std::size_t g = 0; g < spec.groups * negatives; ++g) motions.push_back(gen.motion());
    for (std::size_t g = 0; g < spec.groups; ++g) looks.push_back(gen.appearance());

    for (std::size_t g = 0; g < spec.groups; ++g) {
      const auto category = kSyntheticCategories[g % std::size(kSyntheticCategories)];
      const auto& look = looks[g];
      // Dyn-Obj swaps in a subject that moves the same way at a different scale.
      const double pos_amplitude = category == Category::kDynObj ? 0.7 : 1.0;
      const auto pos_look = edited_look(gen, look, category, spec.patches, spec.dim);

      SyntheticVideo ref{gen.render(id_of("g%03zu_ref", g), look, motions[g], 1.0, gen.phase()), g, g, g,
                         Role::kReference, category, {}};
      SyntheticVideo pos{gen.render(id_of("g%03zu_pos", g), pos_look, motions[g], pos_amplitude, gen.phase()), g,
                         g, g, Role::kPositive, category, {}};
      out.push_back(std::move(ref));
      out.push_back(std::move(pos));
      for (std::size_t j = 0; j < negatives; ++j) {
        const auto m = spec.groups + g * negatives + j;
        out.push_back({gen.render(id_of("g%03zu_neg%zu", g, j), look, motions[m], 1.0, gen.phase()), g, m, g,
                       Role::kNegative, category, {}});
      }
    }
  } else {
    std::vector<Motion> motions;
    std::vector<Appearance> styles;
    for (std::size_t g = 0; g < spec.groups; ++g) motions.push_back(gen.motion());
    for (std::size_t s = 0; s < spec.styles; ++s) styles.push_back(gen.appearance());
    for (std::size_t g = 0; g < spec.groups; ++g) {
      for (std::size_t i = 0; i < spec.per_group; ++i) {
        const auto s = i % spec.styles;
        out.push_back({gen.render(id_of("c%02zu_v%03zu", g, i), styles[s], motions[g], 1.0, gen.phase()), g, g, s,
                       Role::kGallery, Category::kNone, id_of("motion_%02zu", g)});
      }
    }
  }
  return out;
}

BenchmarkManifest generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  const auto videos = synthesize(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "features", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "features").string() + "': " + ec.message());

  BenchmarkManifest m;
  m.base_dir = out_dir;
  const bool triplets = spec.layout == SyntheticLayout::kTriplet;
  m.kind = triplets ? ManifestKind::kTripletSynthetic : ManifestKind::kLabeledKnn;
  m.name = std::string(triplets ? "synthetic-triplets" : "synthetic-labeled") + "-seed" + std::to_string(spec.seed);
  for (const auto& v : videos) {
    const auto rel = "features/" + v.tensor.video_id + ".mvft";
    write_feature_file(v.tensor, out_dir / rel);
    ManifestEntry e;
    e.video_id = v.tensor.video_id;
    e.feature_path = rel;
    if (triplets) {
      e.role = v.role;
      e.triplet_id = id_of("t%03zu", v.group);
      e.category = v.category;
      m.entries.push_back(e);
    } else {
      e.label = v.label;
      e.role = Role::kQuery;
      m.entries.push_back(e);
      e.role = Role::kGallery;
      m.entries.push_back(e);
    }
  }
  m.save(out_dir / "manifest.json");
  return BenchmarkManifest::load(out_dir / "manifest.json");
}

}  // namespace mret
