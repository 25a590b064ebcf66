#pragma once

// JSON schema for SynthSpec (see README, "Fixture spec format").

#include <nlohmann/json.hpp>

#include <string>

#include "densewarp/synthgen.hpp"

namespace densewarp {
namespace detail {

inline Affine2 affine_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_array()) {
    if (j.size() != 6) throw FormatError(field + ": affine arrays need 6 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
            j[3].get<double>(), j[4].get<double>(), j[5].get<double>()};
  }
  if (j.is_object()) {
    Affine2 out;
    if (j.contains("rotate_deg")) {
      const auto pivot = j.value("pivot", std::vector<double>{0.0, 0.0});
      if (pivot.size() != 2) throw FormatError(field + ".pivot: expected [x, y]");
      out = Affine2::rotation_about(j["rotate_deg"].get<double>(), {pivot[0], pivot[1]});
    }
    if (j.contains("translate")) {
      const auto t = j["translate"].get<std::vector<double>>();
      if (t.size() != 2) throw FormatError(field + ".translate: expected [tx, ty]");
      out.c += t[0];
      out.f += t[1];
    }
    return out;
  }
  throw FormatError(field + ": expected a 6-number array or a {rotate_deg, pivot, translate} object");
}

}  // namespace detail

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  try {
    SynthSpec spec;
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.speckle_dropout = j.value("speckle_dropout", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("texture")) {
      const auto& t = j["texture"];
      const auto kind = texture_from_name(t.value("kind", std::string("stripes")));
      if (!kind) throw FormatError("texture.kind must be stripes, checker, gradient or noise");
      spec.texture.kind = *kind;
      spec.texture.period = t.value("period", spec.texture.period);
    }
    if (!j.contains("parts") || !j["parts"].is_array()) throw FormatError("'parts' array is required");
    for (std::size_t k = 0; k < j["parts"].size(); ++k) {
      const auto& jp = j["parts"][k];
      const std::string field = "parts[" + std::to_string(k) + "]";
      SynthPart p;
      p.part_id = jp.at("part").get<int>();
      const auto rect = jp.at("rect").get<std::vector<int>>();
      if (rect.size() != 4) throw FormatError(field + ".rect: expected [x, y, w, h]");
      p.x = rect[0];
      p.y = rect[1];
      p.w = rect[2];
      p.h = rect[3];
      p.uv = jp.contains("uv_affine") ? detail::affine_from_json(jp["uv_affine"], field + ".uv_affine")
                                      : Affine2::chart_for_rect(p.x, p.y, p.w, p.h);
      if (jp.contains("placement")) p.placement = detail::affine_from_json(jp["placement"], field + ".placement");
      p.in_garment = jp.value("in_garment", true);
      spec.parts.push_back(p);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("synth spec: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

inline nlohmann::json to_json(const SynthSpec& spec) {
  nlohmann::json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["speckle_dropout"] = spec.speckle_dropout;
  j["seed"] = spec.seed;
  j["texture"] = {{"kind", texture_name(spec.texture.kind)}, {"period", spec.texture.period}};
  j["parts"] = nlohmann::json::array();
  for (const auto& p : spec.parts) {
    const auto aff = [](const Affine2& a) { return nlohmann::json::array({a.a, a.b, a.c, a.d, a.e, a.f}); };
    j["parts"].push_back({{"part", p.part_id},
                          {"rect", {p.x, p.y, p.w, p.h}},
                          {"uv_affine", aff(p.uv)},
                          {"placement", aff(p.placement)},
                          {"in_garment", p.in_garment}});
  }
  return j;
}

}  // namespace densewarp
