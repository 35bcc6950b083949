#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dicg/config.hpp"
#include "dicg/worlds/coordination_game.hpp"
#include "dicg/worlds/predator_prey.hpp"
#include "dicg/worlds/traffic_junction.hpp"

namespace dicg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: key '" + path + "': " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key");
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

long as_long(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0))
    fail(path, "expected a nonnegative integer");
  return j.get<uint64_t>();
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> as_int_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) fail(path, "expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

void apply_world(const json& j, WorldConfig& w) {
  if (!j.contains("name")) fail("world.name", "missing required key");
  w.name = as_string(j.at("name"), "world.name");
  if (w.name == "predator_prey") {
    check_keys(j, "world",
               {"name", "grid_size", "n_predators", "n_prey", "penalty", "capture_reward",
                "step_cost", "max_steps", "view_radius", "capture_range", "prey_stay_prob"});
    if (j.contains("grid_size")) w.grid_size = as_int(j.at("grid_size"), "world.grid_size");
    if (j.contains("n_predators")) w.n_predators = as_int(j.at("n_predators"), "world.n_predators");
    if (j.contains("n_prey")) w.n_prey = as_int(j.at("n_prey"), "world.n_prey");
    if (j.contains("penalty")) w.penalty = as_double(j.at("penalty"), "world.penalty");
    if (j.contains("capture_reward"))
      w.capture_reward = as_double(j.at("capture_reward"), "world.capture_reward");
    if (j.contains("step_cost")) w.step_cost = as_double(j.at("step_cost"), "world.step_cost");
    if (j.contains("max_steps")) w.max_steps = as_int(j.at("max_steps"), "world.max_steps");
    if (j.contains("view_radius")) w.view_radius = as_int(j.at("view_radius"), "world.view_radius");
    if (j.contains("capture_range")) {
      w.capture_range = as_string(j.at("capture_range"), "world.capture_range");
      if (w.capture_range != "moore" && w.capture_range != "von_neumann")
        fail("world.capture_range", "must be 'moore' or 'von_neumann'");
    }
    if (j.contains("prey_stay_prob"))
      w.prey_stay_prob = as_double(j.at("prey_stay_prob"), "world.prey_stay_prob");
  } else if (w.name == "traffic_junction") {
    check_keys(j, "world", {"name", "difficulty", "collision_penalty", "congestion_coef"});
    if (j.contains("difficulty")) {
      w.difficulty = as_string(j.at("difficulty"), "world.difficulty");
      if (w.difficulty != "easy" && w.difficulty != "medium" && w.difficulty != "hard")
        fail("world.difficulty", "must be 'easy', 'medium' or 'hard'");
    }
    if (j.contains("collision_penalty"))
      w.collision_penalty = as_double(j.at("collision_penalty"), "world.collision_penalty");
    if (j.contains("congestion_coef"))
      w.congestion_coef = as_double(j.at("congestion_coef"), "world.congestion_coef");
  } else if (w.name == "coordination") {
    check_keys(j, "world", {"name", "n_agents", "n_actions"});
    if (j.contains("n_agents")) w.n_agents = as_int(j.at("n_agents"), "world.n_agents");
    if (j.contains("n_actions")) w.n_actions = as_int(j.at("n_actions"), "world.n_actions");
  } else {
    fail("world.name", "unknown world '" + w.name + "'");
  }
}

void apply_algo(const json& j, AlgoSpec& a) {
  if (!j.contains("kind")) fail("algo.kind", "missing required key");
  a.kind = as_string(j.at("kind"), "algo.kind");
  bool known = false;
  for (const auto& k : algorithm_kinds()) known = known || k == a.kind;
  if (!known) fail("algo.kind", "unknown algorithm '" + a.kind + "'");
  check_keys(j, "algo",
             {"kind", "encoder_widths", "embed_dim", "gcn_layers", "policy_widths",
              "critic_widths", "per_agent_baseline"});
  if (j.contains("encoder_widths"))
    a.encoder_widths = as_int_vector(j.at("encoder_widths"), "algo.encoder_widths");
  if (j.contains("embed_dim")) a.embed_dim = as_int(j.at("embed_dim"), "algo.embed_dim");
  if (j.contains("gcn_layers")) a.gcn_layers = as_int(j.at("gcn_layers"), "algo.gcn_layers");
  if (j.contains("policy_widths"))
    a.policy_widths = as_int_vector(j.at("policy_widths"), "algo.policy_widths");
  if (j.contains("critic_widths"))
    a.critic_widths = as_int_vector(j.at("critic_widths"), "algo.critic_widths");
  if (j.contains("per_agent_baseline"))
    a.per_agent_baseline = as_bool(j.at("per_agent_baseline"), "algo.per_agent_baseline");
}

void apply_ppo(const json& j, PpoConfig& p) {
  check_keys(j, "ppo",
             {"clip", "lr", "gamma", "lambda", "entropy_coef", "value_coef", "epochs",
              "minibatches", "batch_size", "grad_clip"});
  if (j.contains("clip")) p.clip = as_double(j.at("clip"), "ppo.clip");
  if (j.contains("lr")) p.lr = as_double(j.at("lr"), "ppo.lr");
  if (j.contains("gamma")) p.gamma = as_double(j.at("gamma"), "ppo.gamma");
  if (j.contains("lambda")) p.lambda = as_double(j.at("lambda"), "ppo.lambda");
  if (j.contains("entropy_coef"))
    p.entropy_coef = as_double(j.at("entropy_coef"), "ppo.entropy_coef");
  if (j.contains("value_coef")) p.value_coef = as_double(j.at("value_coef"), "ppo.value_coef");
  if (j.contains("epochs")) p.epochs = as_int(j.at("epochs"), "ppo.epochs");
  if (j.contains("minibatches")) p.minibatches = as_int(j.at("minibatches"), "ppo.minibatches");
  if (j.contains("batch_size")) p.batch_size = as_long(j.at("batch_size"), "ppo.batch_size");
  if (j.contains("grad_clip")) p.grad_clip = as_double(j.at("grad_clip"), "ppo.grad_clip");
}

}  // namespace

RunConfig default_config(const std::string& world_name, const std::string& algo_kind,
                         const std::string& difficulty) {
  RunConfig c;
  c.world.name = world_name;
  c.world.difficulty = difficulty;
  c.algo.kind = algo_kind;

  const bool dicg_like = algo_kind == "dicg_ce" || algo_kind == "dicg_de" ||
                         algo_kind == "dicg_de_uniform" || algo_kind == "amlp_de";
  if (world_name == "predator_prey") {
    c.ppo.batch_size = 60000;
    c.ppo.entropy_coef = 0.1;
    if (dicg_like) {
      c.algo.encoder_widths = {128};
      c.algo.embed_dim = 64;
      c.algo.gcn_layers = 2;
      c.algo.policy_widths = {128, 64, 32};
      c.algo.critic_widths = {64, 64, 32};
    } else if (algo_kind == "dec") {
      c.algo.policy_widths = {128, 64, 32};
      c.algo.critic_widths = {64, 64, 32};
    } else {  // cent
      c.algo.policy_widths = {512, 128, 64};
      c.algo.critic_widths = {64, 64, 32};
    }
  } else if (world_name == "traffic_junction") {
    c.ppo.batch_size = difficulty == "hard" ? 80000 : 60000;
    c.ppo.entropy_coef = 0.02;
    if (algo_kind == "dicg_ce") {
      c.algo.encoder_widths = {128};
      c.algo.embed_dim = 128;
      c.algo.gcn_layers = 2;
      c.algo.policy_widths = {128, 64, 32};
      c.algo.critic_widths = {64, 64, 64};
    } else if (dicg_like) {  // dicg_de, dicg_de_uniform, amlp_de
      c.algo.encoder_widths = {128, 128};
      c.algo.embed_dim = 128;
      c.algo.gcn_layers = 2;
      c.algo.policy_widths = {256, 128, 64};
      c.algo.critic_widths = {64, 64, 64};
    } else if (algo_kind == "dec") {
      c.algo.policy_widths = {256, 128, 64};
      c.algo.critic_widths = {64, 64, 64};
    } else {  // cent
      c.algo.policy_widths = {512, 128, 64};
      c.algo.critic_widths = {64, 64, 64};
    }
  } else if (world_name == "coordination") {
    c.ppo.batch_size = 1024;
    c.ppo.entropy_coef = 0.01;
    c.algo.encoder_widths = {16};
    c.algo.embed_dim = 16;
    c.algo.gcn_layers = 2;
    c.algo.policy_widths = {32};
    c.algo.critic_widths = {32};
  } else {
    throw ConfigError("config: unknown world '" + world_name + "'");
  }
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(j, "",
             {"world", "algo", "ppo", "seed", "iterations", "out_dir", "workers", "eval_every",
              "eval_episodes", "checkpoint_every", "wallclock"});
  if (!j.contains("world")) fail("world", "missing required section");
  if (!j.contains("algo")) fail("algo", "missing required section");
  if (!j.at("world").is_object()) fail("world", "expected an object");
  if (!j.at("algo").is_object()) fail("algo", "expected an object");
  if (!j.at("world").contains("name")) fail("world.name", "missing required key");
  if (!j.at("algo").contains("kind")) fail("algo.kind", "missing required key");

  const std::string world_name = as_string(j.at("world").at("name"), "world.name");
  const std::string algo_kind = as_string(j.at("algo").at("kind"), "algo.kind");
  std::string difficulty = "easy";
  if (j.at("world").contains("difficulty") && j.at("world").at("difficulty").is_string())
    difficulty = j.at("world").at("difficulty").get<std::string>();

  RunConfig c;
  try {
    c = default_config(world_name, algo_kind, difficulty);
  } catch (const ConfigError&) {
    // Full validation below produces the precise key path.
    c = RunConfig{};
  }
  apply_world(j.at("world"), c.world);
  apply_algo(j.at("algo"), c.algo);
  if (j.contains("ppo")) apply_ppo(j.at("ppo"), c.ppo);
  if (j.contains("seed")) c.seed = as_u64(j.at("seed"), "seed");
  if (j.contains("iterations")) c.iterations = as_int(j.at("iterations"), "iterations");
  if (j.contains("out_dir")) c.out_dir = as_string(j.at("out_dir"), "out_dir");
  if (j.contains("workers")) c.workers = as_int(j.at("workers"), "workers");
  if (j.contains("eval_every")) c.eval_every = as_int(j.at("eval_every"), "eval_every");
  if (j.contains("eval_episodes")) c.eval_episodes = as_int(j.at("eval_episodes"), "eval_episodes");
  if (j.contains("checkpoint_every"))
    c.checkpoint_every = as_int(j.at("checkpoint_every"), "checkpoint_every");
  if (j.contains("wallclock")) c.wallclock = as_bool(j.at("wallclock"), "wallclock");
  if (c.iterations < 0) fail("iterations", "must be nonnegative");
  if (c.workers < 1) fail("workers", "must be >= 1");
  return c;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& c) {
  json w;
  w["name"] = c.world.name;
  if (c.world.name == "predator_prey") {
    w["grid_size"] = c.world.grid_size;
    w["n_predators"] = c.world.n_predators;
    w["n_prey"] = c.world.n_prey;
    w["penalty"] = c.world.penalty;
    w["capture_reward"] = c.world.capture_reward;
    w["step_cost"] = c.world.step_cost;
    w["max_steps"] = c.world.max_steps;
    w["view_radius"] = c.world.view_radius;
    w["capture_range"] = c.world.capture_range;
    w["prey_stay_prob"] = c.world.prey_stay_prob;
  } else if (c.world.name == "traffic_junction") {
    w["difficulty"] = c.world.difficulty;
    w["collision_penalty"] = c.world.collision_penalty;
    w["congestion_coef"] = c.world.congestion_coef;
  } else if (c.world.name == "coordination") {
    w["n_agents"] = c.world.n_agents;
    w["n_actions"] = c.world.n_actions;
  }

  json a;
  a["kind"] = c.algo.kind;
  a["encoder_widths"] = c.algo.encoder_widths;
  a["embed_dim"] = c.algo.embed_dim;
  a["gcn_layers"] = c.algo.gcn_layers;
  a["policy_widths"] = c.algo.policy_widths;
  a["critic_widths"] = c.algo.critic_widths;
  a["per_agent_baseline"] = c.algo.per_agent_baseline;

  json p;
  p["clip"] = c.ppo.clip;
  p["lr"] = c.ppo.lr;
  p["gamma"] = c.ppo.gamma;
  p["lambda"] = c.ppo.lambda;
  p["entropy_coef"] = c.ppo.entropy_coef;
  p["value_coef"] = c.ppo.value_coef;
  p["epochs"] = c.ppo.epochs;
  p["minibatches"] = c.ppo.minibatches;
  p["batch_size"] = c.ppo.batch_size;
  p["grad_clip"] = c.ppo.grad_clip;

  json j;
  j["world"] = w;
  j["algo"] = a;
  j["ppo"] = p;
  j["seed"] = c.seed;
  j["iterations"] = c.iterations;
  j["out_dir"] = c.out_dir;
  j["workers"] = c.workers;
  j["eval_every"] = c.eval_every;
  j["eval_episodes"] = c.eval_episodes;
  j["checkpoint_every"] = c.checkpoint_every;
  j["wallclock"] = c.wallclock;
  return j.dump(2) + "\n";
}

std::unique_ptr<World> make_world(const WorldConfig& cfg) {
  if (cfg.name == "predator_prey") {
    PredatorPreyConfig c;
    c.grid_size = cfg.grid_size;
    c.n_predators = cfg.n_predators;
    c.n_prey = cfg.n_prey;
    c.penalty = cfg.penalty;
    c.capture_reward = cfg.capture_reward;
    c.step_cost = cfg.step_cost;
    c.max_steps = cfg.max_steps;
    c.view_radius = cfg.view_radius;
    c.capture_range =
        cfg.capture_range == "von_neumann" ? CaptureRange::kVonNeumann : CaptureRange::kMoore;
    c.prey_stay_prob = cfg.prey_stay_prob;
    return std::make_unique<PredatorPreyWorld>(c);
  }
  if (cfg.name == "traffic_junction") {
    TrafficJunctionConfig c;
    c.difficulty = cfg.difficulty == "hard"
                       ? TjDifficulty::kHard
                       : (cfg.difficulty == "medium" ? TjDifficulty::kMedium : TjDifficulty::kEasy);
    c.collision_penalty = cfg.collision_penalty;
    c.congestion_coef = cfg.congestion_coef;
    return std::make_unique<TrafficJunctionWorld>(c);
  }
  if (cfg.name == "coordination") {
    CoordinationGameConfig c;
    c.n_agents = cfg.n_agents;
    c.n_actions = cfg.n_actions;
    return std::make_unique<CoordinationGameWorld>(c);
  }
  throw ConfigError("config: unknown world '" + cfg.name + "'");
}

}  // namespace dicg
