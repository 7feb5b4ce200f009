#include "domino/errors.hpp"
#include "domino/trainer.hpp"

namespace domino::trainer {

const char* to_string(Mode m) noexcept {
  return m == Mode::domino_denoise ? "dd" : "n2f-domino";
}

Mode parse_mode(const std::string& s) {
  if (s == "dd") return Mode::domino_denoise;
  if (s == "n2f-domino") return Mode::n2f_domino;
  throw PreconditionError("unknown mode: " + s);
}

nlohmann::json RunReport::to_json() const {
  auto optional_int = [](const std::optional<int>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["iterations"] = iterations;
  j["epochs"] = epochs;
  j["halting_epoch"] = optional_int(halting_epoch);
  j["best_epoch"] = optional_int(best_epoch);
  j["q"] = q;
  j["s"] = s;
  if (mode == Mode::n2f_domino) j["validation_mse"] = validation_mse;
  j["unresolved_pixels"] = unresolved_pixels;
  j["psnr_vs_input"] = psnr_vs_input ? nlohmann::json(*psnr_vs_input) : nlohmann::json(nullptr);
  if (wall_time_s) j["wall_time_s"] = *wall_time_s;
  return j;
}

}  // namespace domino::trainer
