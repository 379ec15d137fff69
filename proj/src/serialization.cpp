#include "mcnb/serialization.hpp"

#include <fstream>

#include "mcnb/errors.hpp"

namespace mcnb {

namespace {

nlohmann::json opt_to_json(const OptimizerState& opt) {
  return {{"m1", opt.m1}, {"m2", opt.m2}, {"step_count", opt.step_count}};
}

OptimizerState opt_from_json(const nlohmann::json& j) {
  OptimizerState opt;
  opt.m1 = j.at("m1").get<std::vector<double>>();
  opt.m2 = j.at("m2").get<std::vector<double>>();
  opt.step_count = j.at("step_count").get<std::size_t>();
  return opt;
}

nlohmann::json shape_to_json(const NetworkShape& s) {
  return {{"input_dim", s.input_dim}, {"width", s.width},
          {"depth", s.depth}};
}

ParamVector params_from_json(const NetworkShape& shape,
                             const nlohmann::json& flat) {
  ParamVector p;
  p.shape = shape;
  p.values = flat.get<std::vector<double>>();
  if (p.values.size() != shape.param_count()) {
    throw DataFormatError("weight array length " +
                          std::to_string(p.values.size()) +
                          " does not match the shape header");
  }
  return p;
}

}  // namespace

nlohmann::json policy_state_to_json(const McnbPolicy& policy) {
  nlohmann::json doc;
  doc["format"] = kStateFormat;
  doc["shape"] = shape_to_json(policy.config().shape);
  doc["rounds_seen"] = policy.rounds_seen();
  doc["cold_started"] = policy.cold_started();

  const MetaLearnerState& meta = policy.meta_state();
  doc["meta"] = {{"params", meta.params.values},
                 {"init_snapshot", meta.init_snapshot.values},
                 {"opt", opt_to_json(meta.opt)}};

  nlohmann::json users = nlohmann::json::array();
  for (std::size_t u = 0; u < policy.n_users(); ++u) {
    const UserLearnerState& st = policy.user_state(u);
    nlohmann::json history = nlohmann::json::array();
    for (const auto& [x, r] : st.history) {
      history.push_back({{"x", x}, {"r", r}});
    }
    users.push_back({{"user_id", st.user_id},
                     {"params", st.params.values},
                     {"serve_count", st.serve_count},
                     {"history", std::move(history)},
                     {"opt", opt_to_json(st.opt)}});
  }
  doc["users"] = std::move(users);
  return doc;
}

void policy_state_from_json(McnbPolicy& policy, const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", std::string()) != kStateFormat) {
    throw DataFormatError("unrecognized state format, expected " +
                          std::string(kStateFormat));
  }
  const NetworkShape want = policy.config().shape;
  const auto& js = doc.at("shape");
  NetworkShape got{js.at("input_dim").get<std::size_t>(),
                   js.at("width").get<std::size_t>(),
                   js.at("depth").get<std::size_t>()};
  if (!(got == want)) {
    throw DataFormatError("snapshot shape does not match the policy shape");
  }

  const auto& jm = doc.at("meta");
  MetaLearnerState meta;
  meta.params = params_from_json(want, jm.at("params"));
  meta.init_snapshot = params_from_json(want, jm.at("init_snapshot"));
  meta.opt = opt_from_json(jm.at("opt"));

  const auto& ju = doc.at("users");
  if (!ju.is_array() || ju.size() != policy.n_users()) {
    throw DataFormatError("snapshot holds " + std::to_string(ju.size()) +
                          " users, policy expects " +
                          std::to_string(policy.n_users()));
  }
  std::vector<UserLearnerState> users;
  users.reserve(ju.size());
  for (const auto& j : ju) {
    UserLearnerState st;
    st.user_id = j.at("user_id").get<std::size_t>();
    st.params = params_from_json(want, j.at("params"));
    st.serve_count = j.at("serve_count").get<std::size_t>();
    for (const auto& h : j.at("history")) {
      st.history.emplace_back(h.at("x").get<std::vector<double>>(),
                              h.at("r").get<double>());
    }
    if (st.serve_count != st.history.size()) {
      throw DataFormatError("serve_count disagrees with history length for "
                            "user " + std::to_string(st.user_id));
    }
    st.opt = opt_from_json(j.at("opt"));
    users.push_back(std::move(st));
  }

  policy.restore(std::move(meta), std::move(users),
                 doc.at("rounds_seen").get<std::size_t>(),
                 doc.at("cold_started").get<bool>());
}

void save_policy_state(const McnbPolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << policy_state_to_json(policy).dump(2) << "\n";
  if (!out) {
    throw IoError("short write to " + path);
  }
}

void load_policy_state(McnbPolicy& policy, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataFormatError(std::string("invalid state file: ") + e.what());
  }
  policy_state_from_json(policy, doc);
}

}  // namespace mcnb
