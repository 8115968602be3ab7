#include <cmath>
#include <numbers>

#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::OptionValue;
using model::PluginKind;

namespace {

// Deterministic sine source with seeded LCG noise (+/- `noise` fraction of
// amplitude), quantized to `precision` decimal places.
class SynthSensor : public PluginInstance {
 public:
  SynthSensor(PluginDescriptor d, Options o, Reporter& r)
      : PluginInstance(std::move(d), std::move(o), r),
        state_(static_cast<uint64_t>(opt_int("seed"))),
        amplitude_(opt_decimal("amplitude")),
        frequency_hz_(opt_decimal("frequency_hz")),
        noise_(opt_decimal("noise")),
        precision_(opt_int("precision")) {}

  std::vector<model::json> poll(int64_t now_ms) override {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    double n = (static_cast<double>((state_ >> 33) % 2001) - 1000.0) / 1000.0;
    double v = amplitude_ * std::sin(2.0 * std::numbers::pi * frequency_hz_ *
                                     static_cast<double>(now_ms) / 1000.0) +
               noise_ * amplitude_ * n;
    double scale = std::pow(10.0, static_cast<double>(precision_));
    v = std::round(v * scale) / scale;
    return {model::json{{"value", v}}};
  }

 private:
  uint64_t state_;
  double amplitude_;
  double frequency_hz_;
  double noise_;
  int64_t precision_;
};

}  // namespace

PluginDescriptor synth_sensor_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "synth_sensor";
  d.kind = PluginKind::polling;
  d.author = "probekit";
  d.description = "Deterministic synthetic sine sensor with seeded noise";
  d.required_capabilities = {Capability::SENSOR_SYNTH};
  d.option_schema = {
      {"seed", OptionType::integer, OptionValue(int64_t{1}), 0.0, {}, {}},
      {"amplitude", OptionType::decimal, OptionValue(1.0), 0.0, {}, {}},
      {"frequency_hz", OptionType::decimal, OptionValue(0.5), 0.0, 1000.0, {}},
      {"noise", OptionType::decimal, OptionValue(0.01), 0.0, 1.0, {}},
      {"precision", OptionType::integer, OptionValue(int64_t{2}), 0.0, 12.0, {}},
  };
  d.default_interval_ms = 100;
  return d;
}

std::unique_ptr<PluginInstance> make_synth_sensor(const Options& options, Reporter& reporter) {
  return std::make_unique<SynthSensor>(synth_sensor_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
