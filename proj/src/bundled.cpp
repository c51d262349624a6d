#include "odex/bundled.hpp"

#include <map>

#include "odex/error.hpp"
#include "odex/io.hpp"

namespace odex::bundled {

namespace {

struct Row {
  double L, K, D, FDV;
  double temperature, velocity, flame_width, flame_intensity;
};

// Initial-day central composite design.
constexpr Row kCcd30[] = {
    {1, -1, 1, -1, 1450.5706, 674.1324, 7.9059, 13.1971},
    {1, 1, 1, 1, 1500.9382, 726.6706, 12.4912, 21.0029},
    {-1, -1, 1, -1, 1484.8952, 649.1190, 8.1238, 15.3929},
    {-1, -1, -1, 1, 1534.6750, 666.0781, 13.5563, 21.4375},
    {0, 0, 0, 0, 1519.4829, 709.3029, 11.9629, 19.7143},
    {0, 0, 0, 0, 1527.6065, 713.6581, 12.1742, 19.9419},
    {-1, 1, 1, -1, 1543.3053, 730.3474, 10.3711, 18.3579},
    {-1, 1, -1, 1, 1574.0970, 739.4212, 14.9909, 23.3667},
    {1, 1, -1, 1, 1536.2371, 756.7057, 13.7657, 21.8543},
    {1, -1, -1, -1, 1497.6209, 698.4093, 8.7767, 15.8093},
    {0, 0, 0, 0, 1527.8571, 710.8250, 11.9821, 19.9393},
    {-1, 1, -1, -1, 1564.3114, 753.5943, 11.1229, 18.7143},
    {1, 1, -1, -1, 1528.9267, 770.7367, 9.5000, 17.0000},
    {-1, 1, 1, 1, 1546.6594, 714.0031, 14.8187, 23.5625},
    {1, -1, 1, 1, 1484.7806, 665.0000, 12.3472, 20.5139},
    {-1, -1, 1, 1, 1502.0265, 640.9088, 13.2176, 21.3500},
    {-1, -1, -1, -1, 1525.3917, 678.9194, 10.0417, 17.2917},
    {1, 1, 1, -1, 1508.2706, 749.0647, 8.5206, 15.9706},
    {0, 0, 0, 0, 1535.5706, 714.2500, 12.3294, 20.1412},
    {1, -1, -1, 1, 1504.6000, 689.5364, 12.6121, 20.2879},
    {0, 0, 0, 0, 1521.7227, 708.9636, 11.7977, 19.6568},
    {0, 0, -2, 0, 1534.7182, 726.6697, 11.7939, 19.2697},
    {-2, 0, 0, 0, 1542.8600, 688.1171, 12.4971, 20.2914},
    {2, 0, 0, 0, 1462.0088, 723.5471, 9.1765, 16.7735},
    {0, 0, 0, 0, 1521.4765, 709.1412, 11.5176, 19.2412},
    {0, 0, 0, -2, 1516.5378, 708.6919, 11.3649, 19.0757},
    {0, 0, 2, 0, 1491.7684, 684.3026, 10.4868, 18.5632},
    {0, 2, 0, 0, 1512.7982, 755.1382, 10.8436, 18.8527},
    {0, 0, 0, 2, 1520.6485, 695.1848, 14.4455, 22.7879},
    {0, -2, 0, 0, 1435.7488, 612.6093, 8.9209, 16.0163},
};

// Bayesian D-optimal augmentation (five gamma values) as run.
constexpr Row kBayesRuns[] = {
    {2, 2, 2, -0.53, 1466.8123, 787.5585, 12.3446, 22.0938},
    {-2, -2, 2, -2, 1298.8123, 593.2692, 10.2261, 9.8646},
    {-2, 0.31, -2, 2, 1560.3545, 706.1242, 18.9030, 28.6333},
    {2, -2, -2, -2, 1437.7284, 687.5351, 7.4500, 13.8446},
};

// Reference augmentation.
constexpr Row kReferenceRuns[] = {
    {1, 1, -1, -1, 1527.1426, 778.2632, 13.2456, 22.3985},
    {-1, 1, 1, -1, 1493.9143, 752.6063, 12.4841, 22.3333},
    {1, 1, 1, 1, 1507.5667, 752.8273, 17.6909, 27.9348},
    {1, -1, 1, -1, 1443.8103, 696.7851, 10.4471, 18.8977},
};

constexpr Row kValidation14[] = {
    {0.01, 1.09, -0.20, -1.67, 1514.6610, 782.1146, 10.2951, 19.1976},
    {0.01, 1.09, -0.20, -1.67, 1521.8186, 786.4209, 10.0116, 18.6930},
    {1.82, -0.36, 0.46, -0.58, 1475.2022, 734.7978, 11.7778, 21.1467},
    {1.82, -0.36, 0.46, -0.58, 1488.6825, 737.3925, 11.1850, 20.0250},
    {1.27, -1.32, 0.38, -0.71, 1434.2327, 687.7714, 10.4510, 18.9408},
    {1.27, -1.32, 0.38, -0.71, 1456.8717, 689.5453, 10.0019, 17.7623},
    {0.00, -0.01, 0.20, -1.73, 1478.7136, 743.1182, 9.7227, 17.1773},
    {0.00, -0.01, 0.20, -1.73, 1520.9761, 747.9326, 9.3457, 16.3413},
    {-0.48, 0.50, -0.60, 1.78, 1529.3061, 726.5163, 17.9367, 27.6449},
    {-0.48, 0.50, -0.60, 1.78, 1521.4094, 721.4434, 17.4113, 27.1906},
    {1.00, -1.00, -1.00, 1.00, 1507.4579, 698.7368, 16.2667, 25.5053},
    {-1.00, -1.00, -1.00, -1.00, 1491.3108, 696.6215, 12.4585, 21.0092},
    {-1.00, -1.00, 1.00, 1.00, 1453.4762, 661.9381, 16.2333, 26.2127},
    {-1.00, 1.00, -1.00, 1.00, 1552.7875, 749.2734, 18.3484, 27.9703},
};

template <std::size_t N>
Dataset to_dataset(const Row (&rows)[N], int day) {
  Dataset d;
  std::vector<double> t, v, w, i;
  for (const Row& r : rows) {
    d.runs.push_back(Run{{r.L, r.K, r.D, r.FDV}, day});
    t.push_back(r.temperature);
    v.push_back(r.velocity);
    w.push_back(r.flame_width);
    i.push_back(r.flame_intensity);
  }
  d.responses["temperature"] = std::move(t);
  d.responses["velocity"] = std::move(v);
  d.responses["flame_width"] = std::move(w);
  d.responses["flame_intensity"] = std::move(i);
  return d;
}

Design design4(std::initializer_list<std::array<double, 4>> rows, const std::string& label) {
  Design d;
  d.label = label;
  for (const auto& r : rows) d.runs.push_back(Run{r, 1});
  return d;
}

using enum Factor;

ModelSpec make_temperature() {
  return {"temperature", Link::Identity, {L, K, D},
          {Term::intercept(), Term::main(L), Term::main(K), Term::main(D), Term::square(K)}};
}

ModelSpec make_velocity() {
  return {"velocity", Link::Log, {L, K, D, FDV},
          {Term::intercept(), Term::main(L), Term::main(K), Term::main(D), Term::main(FDV),
           Term::square(K), Term::interaction(L, K)}};
}

ModelSpec make_flame_width() {
  return {"flame_width", Link::Inverse, {L, K, D, FDV},
          {Term::intercept(), Term::main(L), Term::main(K), Term::main(D), Term::main(FDV),
           Term::square(K)}};
}

ModelSpec make_flame_intensity() {
  return {"flame_intensity", Link::Identity, {L, K, D, FDV},
          {Term::intercept(), Term::main(L), Term::main(K), Term::main(D), Term::main(FDV),
           Term::square(L), Term::square(K), Term::square(FDV), Term::interaction(D, FDV)}};
}

const std::map<std::string, Design>& published_table() {
  static const std::map<std::string, Design> table = [] {
    std::map<std::string, Design> t;
    auto add = [&t](const std::string& key, std::initializer_list<std::array<double, 4>> rows) {
      t.emplace(key, design4(rows, key));
    };
    add("local-D/temperature",
        {{-2, -0.07, -2, 0}, {2, -0.13, 2, 0}, {2, 2, -2, 0}, {-2, -2, 2, 0}});
    add("local-D/velocity", {{-2, 2, -2, 2}, {-2, -2, 2, 2}, {2, 2, -2, -2}, {2, -2, 2, -2}});
    add("local-D/flame_width",
        {{2, 0.37, 2, 2}, {-2, 2, -2, 2}, {-2, 0.08, -2, 2}, {2, 0.37, -2, -2}});
    add("local-D/flame_intensity",
        {{2, 2, 2, -2}, {-2, -2, 2, -2}, {0.47, -0.95, 2, -0.64}, {2, -2, -2, -2}});
    add("local-D1/temperature", {{-1.23, -1.32, -0.05, 0},
                                 {0.10, 0.94, 0.81, 0},
                                 {0.28, 0.64, 0.42, 0},
                                 {1.20, -0.64, -0.89, 0}});
    add("local-D1/velocity", {{0.00, 0.96, 0.64, -0.73},
                              {-0.54, -0.62, -1.90, 0.84},
                              {0.40, -1.12, 1.31, -1.25},
                              {0.13, 0.79, -0.05, 1.14}});
    add("local-D1/flame_width", {{-1.02, 0.29, 1.72, -1.83},
                                 {-1.81, 0.99, 0.29, 1.92},
                                 {0.07, -1.07, -1.40, -0.29},
                                 {1.54, 0.28, -1.58, 1.50}});
    add("local-D1/flame_intensity", {{1.59, 1.03, 1.30, -1.075},
                                     {0.09, -1.53, 1.43, -0.51},
                                     {0.00, -0.61, -0.66, 0.64},
                                     {-0.85, 0.22, -1.79, -1.11}});
    add("bayes-D/fixed", {{2, 2, 2, 2}, {2, -2, 2, -2}, {-2, 0.34, -2, 2}, {-2, -2, -2, -2}});
    add("bayes-D/pm10", {{2, 2, 2, -2}, {2, -2, -2, -2}, {-2, 0.37, -2, 2}, {-2, -2, 2, 2}});
    add("bayes-D1/fixed", {{0.03, -1.62, 2.00, -0.65},
                           {0.90, 0.36, 0.44, -0.57},
                           {1.11, 0.53, -2.00, -0.70},
                           {-1.83, 0.54, -0.53, 2.00}});
    add("bayes-D1/pm10", {{-0.57, 0.13, -1.15, -0.96},
                          {0.46, -1.53, 1.97, -0.61},
                          {-1.37, 0.45, -0.61, 1.83},
                          {1.42, 0.84, -0.27, -0.60}});
    add("compromise/0.5", {{0.10, 0.17, 2.00, -0.76},
                           {0.29, -2.00, -2.00, -1.05},
                           {1.75, 0.58, 2.00, -0.08},
                           {-2.00, 0.41, -2.00, 2.00}});
    add("bayes-D/pm10pm20",
        {{2, 2, 2, -0.53}, {-2, -2, 2, -2}, {-2, 0.31, -2, 2}, {2, -2, -2, -2}});
    return t;
  }();
  return table;
}

}  // namespace

Dataset ccd30() { return to_dataset(kCcd30, 0); }
Dataset reference_runs() { return to_dataset(kReferenceRuns, 1); }
Dataset bayes_runs() { return to_dataset(kBayesRuns, 1); }
Dataset validation14() { return to_dataset(kValidation14, 1); }

Design reference_design() {
  Design d;
  d.label = "reference";
  d.runs = reference_runs().runs;
  return d;
}

std::vector<ModelSpec> models() {
  return {make_temperature(), make_velocity(), make_flame_width(), make_flame_intensity()};
}

std::vector<std::string> all_model_names() {
  return {kResponseNames.begin(), kResponseNames.end()};
}

ModelSpec model(const std::string& name) {
  for (ModelSpec& m : models())
    if (m.name == name) return m;
  throw Error(ErrorKind::InvalidArgument, "no bundled model named '" + name + "'");
}

double default_gamma(const std::string& name) {
  if (name == "temperature") return -16.0;
  if (name == "velocity") return 0.01;
  if (name == "flame_width") return 0.002;
  if (name == "flame_intensity") return 0.09;
  throw Error(ErrorKind::InvalidArgument, "no bundled model named '" + name + "'");
}

ParamPoint estimates(const std::string& name) {
  std::vector<double> b;
  if (name == "temperature") b = {1523.2627, -17.7423, 19.6580, -13.8181, -9.9897};
  else if (name == "velocity") b = {6.5648, 0.0136, 0.0516, -0.0171, -0.0078, -0.0092, -0.0031};
  else if (name == "flame_width") b = {0.0863, 0.0053, -0.0044, 0.0029, -0.0123, 0.0039};
  else if (name == "flame_intensity")
    b = {19.4784, -0.8887, 0.8646, -0.3709, 2.1661, -0.3096, -0.5615, 0.5092, 0.4095};
  else throw Error(ErrorKind::InvalidArgument, "no bundled model named '" + name + "'");
  ParamPoint p;
  p.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  p.gamma = default_gamma(name);
  return p;
}

Design published(const std::string& key) {
  const auto& t = published_table();
  auto it = t.find(key);
  if (it == t.end()) {
    std::string known;
    for (const auto& k : published_keys()) known += (known.empty() ? "" : ", ") + k;
    throw Error(ErrorKind::InvalidArgument,
                "no published design '" + key + "'; known: " + known);
  }
  return it->second;
}

std::vector<std::string> published_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : published_table()) keys.push_back(k);
  return keys;
}

GammaSpread parse_gamma_spread(std::string_view name) {
  if (name == "fixed") return GammaSpread::Fixed;
  if (name == "pm10") return GammaSpread::Pm10;
  if (name == "pm10pm20") return GammaSpread::Pm10Pm20;
  throw Error(ErrorKind::InvalidArgument, "unknown gamma spread '" + std::string(name) + "'");
}

std::string_view gamma_spread_name(GammaSpread spread) {
  switch (spread) {
    case GammaSpread::Fixed: return "fixed";
    case GammaSpread::Pm10: return "pm10";
    case GammaSpread::Pm10Pm20: return "pm10pm20";
  }
  return "?";
}

std::vector<double> gamma_multipliers(GammaSpread spread) {
  switch (spread) {
    case GammaSpread::Fixed: return {1.0};
    case GammaSpread::Pm10: return {0.9, 1.0, 1.1};
    case GammaSpread::Pm10Pm20: return {0.8, 0.9, 1.0, 1.1, 1.2};
  }
  return {1.0};
}

std::vector<Scenario> scenarios(const std::vector<std::string>& model_names, GammaSpread spread) {
  std::vector<Scenario> out;
  for (const std::string& name : model_names) {
    for (double mult : gamma_multipliers(spread)) {
      Scenario s;
      s.spec = model(name);
      s.params = estimates(name);
      s.params.gamma = mult * default_gamma(name);
      s.weight = 1.0;
      s.label = spread == GammaSpread::Fixed ? name : name + "@" + format_number(mult);
      out.push_back(std::move(s));
    }
  }
  return out;
}

ScenarioEnsemble ensemble(const std::vector<std::string>& model_names, GammaSpread spread, int m) {
  Design initial;
  initial.label = "ccd30";
  initial.runs = ccd30().runs;
  return ScenarioEnsemble(scenarios(model_names, spread), std::move(initial), m);
}

void use_published_optima(ScenarioEnsemble& ens) {
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const std::string& name = ens.scenario(i).spec.name;
    OptimumCache c;
    c.d_optimal = published("local-D/" + name);
    c.d1_optimal = published("local-D1/" + name);
    c.phi_D = ens.evaluator(i).phi_D(c.d_optimal.runs);
    c.phi_D1 = ens.evaluator(i).phi_D1(c.d1_optimal.runs);
    c.phi_D1_at_D = ens.evaluator(i).phi_D1(c.d_optimal.runs);
    ens.set_cache(i, std::move(c));
  }
}

SeedProvider published_local_seeds(const ScenarioEnsemble& ens) {
  std::vector<std::string> names;
  for (const Scenario& s : ens.scenarios()) names.push_back(s.spec.name);
  return [names](std::size_t i, Flavor flavor) {
    std::vector<Design> seeds{reference_design()};
    const std::string key =
        std::string(flavor == Flavor::D ? "local-D/" : "local-D1/") + names.at(i);
    const auto& t = published_table();
    if (auto it = t.find(key); it != t.end()) seeds.push_back(it->second);
    return seeds;
  };
}

std::vector<Design> published_design_seeds() {
  std::vector<Design> seeds{reference_design()};
  for (const auto& [key, d] : published_table())
    if (key.rfind("local-", 0) != 0) seeds.push_back(d);
  return seeds;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace odex::bundled
