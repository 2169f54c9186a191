#include "kaslib/surrogate.hpp"

#include "kaslib/error.hpp"
#include "kaslib/json_util.hpp"

namespace kas {

std::string method_name(Method method) { return method == Method::as ? "AS" : "KAS"; }

Method parse_method(const std::string& name) {
  if (name == "as" || name == "AS") return Method::as;
  if (name == "kas" || name == "KAS") return Method::kas;
  throw ArgumentError("unknown method '" + name + "' (expected as or kas)");
}

Surrogate fit_surrogate(const GradientDataset& ds, Method method, int r, const std::optional<FeatureMap>& fm,
                        const GpFitOptions& gp_options) {
  ds.validate();
  SubspaceResult sub;
  if (method == Method::as) {
    sub = active_subspace(ds, r);
  } else {
    if (!fm) throw ArgumentError("fit_surrogate: the KAS method needs a feature map");
    sub = kernel_active_subspace(ds, *fm, r);
  }
  const Matrix reduced = project(sub, normalize(ds.X, ds.spec));
  GpModel gp = gp_fit(reduced, ds.Y, KernelConfig{}, gp_options);
  return Surrogate{std::move(sub), std::move(gp), ds.spec};
}

Matrix reduced_coordinates(const Surrogate& s, const Matrix& x) {
  if (x.cols() != s.input_dim()) {
    throw DimensionError("surrogate: inputs have " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(s.input_dim()));
  }
  return project(s.subspace, normalize(x, s.spec));
}

GpBatchPrediction predict(const Surrogate& s, const Matrix& x) {
  if (x.rows() == 0) {
    if (x.cols() != 0 && x.cols() != s.input_dim()) {
      throw DimensionError("surrogate: inputs have the wrong column count");
    }
    return GpBatchPrediction{Matrix(0, s.gp.targets().cols()), Vector(0)};
  }
  return s.gp.predict(reduced_coordinates(s, x));
}

double holdout_rrmse(const GradientDataset& train, const GradientDataset& test, Method method, int r,
                     const std::optional<FeatureMap>& fm, const GpFitOptions& gp_options) {
  const Surrogate s = fit_surrogate(train, method, r, fm, gp_options);
  return rrmse(test.Y, predict(s, test.X).means);
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const InputSpec& spec) {
  nlohmann::json coords = nlohmann::json::array();
  for (Index i = 0; i < spec.dim(); ++i) {
    const Distribution& d = spec.coords[static_cast<std::size_t>(i)];
    nlohmann::json c;
    c["name"] = spec.name(i);
    if (const auto* u = std::get_if<Uniform>(&d)) {
      c["distribution"] = "uniform";
      c["lower"] = u->lower;
      c["upper"] = u->upper;
    } else {
      c["distribution"] = "standard-normal";
    }
    coords.push_back(std::move(c));
  }
  return {{"coords", coords}};
}

static InputSpec input_spec_from_json_unchecked(const nlohmann::json& j) {
  InputSpec spec;
  for (const auto& c : j.at("coords")) {
    const std::string kind = c.at("distribution").get<std::string>();
    if (kind == "uniform") {
      spec.coords.emplace_back(Uniform{c.at("lower").get<double>(), c.at("upper").get<double>()});
    } else if (kind == "standard-normal") {
      spec.coords.emplace_back(StandardNormal{});
    } else {
      throw SchemaError("input spec JSON: unknown distribution '" + kind + "'");
    }
    spec.names.push_back(c.value("name", "x" + std::to_string(spec.coords.size())));
  }
  spec.validate();
  return spec;
}

InputSpec input_spec_from_json(const nlohmann::json& j) {
  return schema_guard("input spec JSON", [&] { return input_spec_from_json_unchecked(j); });
}

nlohmann::json to_json(const Surrogate& s) {
  nlohmann::json j;
  j["method"] = s.subspace.kind == SubspaceKind::as ? "AS" : "KAS";
  j["input_spec"] = to_json(s.spec);
  j["subspace"] = to_json(s.subspace, s.subspace.kind == SubspaceKind::as);
  j["gp"] = to_json(s.gp);
  return j;
}

Surrogate surrogate_from_json(const nlohmann::json& j) {
  try {
    SubspaceResult sub = subspace_from_json(j.at("subspace"));
    GpModel gp = gp_model_from_json(j.at("gp"));
    InputSpec spec = input_spec_from_json(j.at("input_spec"));
    if (gp.inputs().cols() != sub.r) throw SchemaError("surrogate JSON: GP inputs do not match r");
    return Surrogate{std::move(sub), std::move(gp), std::move(spec)};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("surrogate JSON: ") + e.what());
  }
}

}  // namespace kas
