#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rth/scenario.hpp"
#include "rth/verify.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace rth;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rth_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream os(path);
  os << body;
}

std::vector<char> slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

const char* kSmokeConfig = R"(
[scenario]
model = core
[grid]
L = 10
N = 8
[params]
alpha = 1.0
gamma = 1.0
epsilon = 0.5
sigma = 1.6
[init]
u = gaussian-blob 0 0 1.5 1.0
v = rho-times-scalar
[run]
T = 0.3
dt = 0.1
sample_every = 1
[output]
formats = bin,csv
)";

}  // namespace

TEST_CASE("snapshot round trip") {
  const auto dir = temp_dir("snapshot");
  const GridSpec g = make_grid(10.0, 8);
  auto gen = test::rng(3);

  SUBCASE("scalar fields") {
    const auto f = test::random_scalar_field(g, gen, -2.0, 2.0);
    write_snapshot(dir / "f.bin", f);
    const auto back = read_snapshot(dir / "f.bin");
    CHECK_FALSE(back.is_traveler);
    CHECK(back.grid() == g);
    CHECK((back.scalar.values.array() == f.values.array()).all());
  }

  SUBCASE("traveler fields keep their frame tag") {
    for (Frame frame : {Frame::eulerian, Frame::lagrangian}) {
      const auto v = test::random_traveler_field(g, gen, -1.0, 1.0, frame);
      write_snapshot(dir / "v.bin", v);
      const auto back = read_snapshot(dir / "v.bin");
      CHECK(back.is_traveler);
      CHECK(back.traveler.frame == frame);
      CHECK((back.traveler.values.array() == v.values.array()).all());
    }
  }

  SUBCASE("header is human readable") {
    write_snapshot(dir / "h.bin", ScalarField::zero(g));
    std::ifstream is(dir / "h.bin", std::ios::binary);
    std::string line;
    std::getline(is, line);
    CHECK(line == "RHSIM1 8 10 scalar");
  }

  SUBCASE("csv export carries full precision") {
    ScalarField f(g);
    f.values.setConstant(1.0 / 3.0);
    write_csv(dir / "f.csv", f);
    std::ifstream is(dir / "f.csv");
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    CHECK(header == "y1,y2,value");
    CHECK(row.find("0.33333333333333331") != std::string::npos);
  }

  SUBCASE("read errors") {
    CHECK_THROWS_AS(read_snapshot(dir / "missing.bin"), std::runtime_error);
    write_text(dir / "junk.bin", "not a snapshot\n");
    CHECK_THROWS_AS(read_snapshot(dir / "junk.bin"), std::runtime_error);
  }
}

TEST_CASE("config parsing") {
  const auto dir = temp_dir("config");

  SUBCASE("full round trip of a valid config") {
    write_text(dir / "ok.cfg", kSmokeConfig);
    const auto cfg = parse_config(dir / "ok.cfg");
    CHECK(cfg.model == ModelKind::core);
    CHECK(cfg.points == 8);
    CHECK(cfg.length == 10.0);
    CHECK(cfg.params.at("alpha") == 1.0);
    CHECK(cfg.init.at("u").rfind("gaussian-blob", 0) == 0);
    CHECK(cfg.total_time == 0.3);
    CHECK(cfg.sample_every == 1);
    CHECK(cfg.formats == std::set<std::string>{"bin", "csv"});
  }

  SUBCASE("errors name the offending key") {
    write_text(dir / "bad1.cfg", "[scenario]\nmodel = core\n[grid]\nL = ten\nN = 8\n");
    CHECK_THROWS_WITH_AS(parse_config(dir / "bad1.cfg"),
                         doctest::Contains("grid.L"), ConfigError);

    write_text(dir / "bad2.cfg", "[scenario]\nmodel = warp\n");
    CHECK_THROWS_WITH_AS(parse_config(dir / "bad2.cfg"),
                         doctest::Contains("unknown model"), ConfigError);

    write_text(dir / "bad3.cfg", "[scenario]\nmodel = core\n[grid]\nL = 10\nN = 8\n"
                                 "[run]\nT = 1\ndt = 0.1\n[output]\nformats = gif\n");
    CHECK_THROWS_WITH_AS(parse_config(dir / "bad3.cfg"),
                         doctest::Contains("unknown format"), ConfigError);

    write_text(dir / "bad4.cfg", "[scenario]\nmodel = core\n");
    CHECK_THROWS_WITH_AS(parse_config(dir / "bad4.cfg"),
                         doctest::Contains("grid.L and grid.N"), ConfigError);
  }

  SUBCASE("parameter invariants are enforced at run time") {
    std::string bad = kSmokeConfig;
    const auto at = bad.find("alpha = 1.0");
    bad.replace(at, 11, "alpha = -1 ");
    write_text(dir / "neg.cfg", bad);
    const auto cfg = parse_config(dir / "neg.cfg");
    CHECK_THROWS_WITH_AS(run_scenario(cfg, temp_dir("config_out")),
                         doctest::Contains("alpha must be > 0"), ConfigError);
  }
}

TEST_CASE("init presets") {
  const GridSpec g = make_grid(10.0, 16);

  SUBCASE("gaussian blob has the requested mass and center") {
    const auto f = rth::detail::gaussian_blob(g, 1.25, -2.5, 0.8, 2.0);
    CHECK(integral(f) == doctest::Approx(2.0).epsilon(1e-12));
    Index best1 = 0, best2 = 0;
    double best = -1;
    for (Index i1 = 0; i1 < g.points; ++i1)
      for (Index i2 = 0; i2 < g.points; ++i2)
        if (f(i1, i2) > best) best = f(i1, i2), best1 = i1, best2 = i2;
    CHECK(g.node(best1) == doctest::Approx(1.25));
    CHECK(g.node(best2) == doctest::Approx(-2.5));
  }

  SUBCASE("point column concentrates the mass at one node") {
    const auto f = rth::detail::build_scalar_init("u", "point-column 3 5 2.5", g, ".");
    CHECK(integral(f) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(f(3, 5) == doctest::Approx(2.5 / g.cell_area()));
    CHECK_THROWS_AS(rth::detail::build_scalar_init("u", "point-column 99 0 1", g, "."),
                    ConfigError);
  }

  SUBCASE("unknown presets are rejected") {
    CHECK_THROWS_AS(rth::detail::build_scalar_init("u", "vortex 1 2", g, "."),
                    ConfigError);
  }

  SUBCASE("file-backed init round trips through a snapshot") {
    const auto dir = temp_dir("init_file");
    auto gen = test::rng(7);
    const auto f = test::random_scalar_field(g, gen, 0.0, 2.0);
    write_snapshot(dir / "u0.bin", f);
    const auto loaded = rth::detail::build_scalar_init("u", "file u0.bin", g, dir);
    CHECK((loaded.values.array() == f.values.array()).all());

    const auto v = test::random_traveler_field(g, gen, 0.0, 1.0);
    write_snapshot(dir / "v0.bin", v);
    const auto vload = rth::detail::build_traveler_init(
        "v", "file v0.bin", g, f, CoreParams{1.0, 1.0, 0.5, 1.6}, dir);
    CHECK((vload.values.array() == v.values.array()).all());

    // Grid mismatch and wrong kind are config errors.
    const GridSpec g2 = make_grid(10.0, 32);
    CHECK_THROWS_AS(rth::detail::build_scalar_init("u", "file u0.bin", g2, dir),
                    ConfigError);
    CHECK_THROWS_AS(rth::detail::build_scalar_init("u", "file v0.bin", g, dir),
                    ConfigError);
  }
}

TEST_CASE("scenario runs") {
  const auto dir = temp_dir("scenario");
  write_text(dir / "core.cfg", kSmokeConfig);

  SUBCASE("core run emits a complete manifest") {
    const auto cfg = parse_config(dir / "core.cfg");
    const auto artifacts = run_scenario(cfg, dir / "out");

    std::set<fs::path> on_disk;
    for (const auto& entry : fs::directory_iterator(dir / "out"))
      on_disk.insert(entry.path().filename());
    std::set<fs::path> listed(artifacts.files.begin(), artifacts.files.end());
    CHECK(listed.size() == artifacts.files.size());  // no duplicates
    CHECK(on_disk == listed);

    // T = 3 dt with sample_every = 1: four samples of each field.
    CHECK(on_disk.count("u_0000.bin") == 1);
    CHECK(on_disk.count("u_0003.bin") == 1);
    CHECK(on_disk.count("diagnostics.csv") == 1);
    CHECK(on_disk.count("manifest.json") == 1);
  }

  SUBCASE("bit-identical reruns") {
    const auto cfg = parse_config(dir / "core.cfg");
    run_scenario(cfg, dir / "out_a");
    run_scenario(cfg, dir / "out_b");
    for (const auto& name : {"u_0003.bin", "v_0003.bin"}) {
      const auto a = slurp(dir / "out_a" / name);
      const auto b = slurp(dir / "out_b" / name);
      CHECK(a == b);
    }
  }

  SUBCASE("oracle dispatch writes one snapshot pair per time") {
    std::string oracle = kSmokeConfig;
    const auto at = oracle.find("model = core");
    oracle.replace(at, 12, "model = oracle");
    write_text(dir / "oracle.cfg", oracle + "\n[run]\ntimes = 0, 1\n");
    const auto artifacts = run_scenario(parse_config(dir / "oracle.cfg"), dir / "oracle_out");
    std::set<fs::path> listed(artifacts.files.begin(), artifacts.files.end());
    CHECK(listed.count("u_0000.bin") == 1);
    CHECK(listed.count("u_0001.bin") == 1);
    CHECK(listed.count("v_0000.bin") == 1);
    CHECK(listed.count("v_0001.bin") == 1);
    CHECK(listed.count("manifest.json") == 1);

    // t = 0 snapshots reproduce the initial data.
    const auto cfg = parse_config(dir / "oracle.cfg");
    const GridSpec g = make_grid(cfg.length, cfg.points);
    const auto u0 = rth::detail::build_scalar_init("u", cfg.init.at("u"), g, dir);
    const auto snap = read_snapshot(dir / "oracle_out" / "u_0000.bin");
    CHECK(test::max_abs_diff(snap.scalar.values, u0.values) < 1e-15);
  }

  SUBCASE("equilibrium dispatch writes the residual report") {
    std::string eq = kSmokeConfig;
    const auto at = eq.find("model = core");
    eq.replace(at, 12, "model = equilibrium");
    write_text(dir / "eq.cfg", eq);
    const auto artifacts = run_scenario(parse_config(dir / "eq.cfg"), dir / "eq_out");
    std::set<fs::path> listed(artifacts.files.begin(), artifacts.files.end());
    CHECK(listed.count("u_bar_0000.bin") == 1);
    CHECK(listed.count("v_bar_0000.bin") == 1);
    CHECK(listed.count("equilibrium_residual.txt") == 1);

    const auto u_bar = read_snapshot(dir / "eq_out" / "u_bar_0000.bin").scalar;
    const auto v_bar = read_snapshot(dir / "eq_out" / "v_bar_0000.bin").traveler;
    ScalarField total = integrate_position(v_bar);
    total.values += u_bar.values;
    const auto u0 = rth::detail::build_scalar_init(
        "u", parse_config(dir / "eq.cfg").init.at("u"), u_bar.grid, dir);
    const auto v0 = rth::detail::build_traveler_init(
        "v", "rho-times-scalar", u_bar.grid, u0, CoreParams{1.0, 1.0, 0.5, 1.6}, dir);
    ScalarField h0 = integrate_position(v0);
    h0.values += u0.values;
    CHECK(test::max_abs_diff(total.values, h0.values) <= 1e-10);
  }
}

TEST_CASE("png rendering") {
  const auto dir = temp_dir("png");
  const GridSpec g = make_grid(10.0, 16);

  SUBCASE("zero field renders to a valid png") {
    render_heatmap(dir / "zero.png", ScalarField::zero(g), "zero");
    const auto bytes = slurp(dir / "zero.png");
    REQUIRE(bytes.size() > 8);
    const unsigned char magic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    for (int i = 0; i < 8; ++i)
      CHECK(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]) == magic[i]);
  }

  SUBCASE("blob field peaks at the blob center") {
    const auto f = rth::detail::gaussian_blob(g, 0.0, 0.0, 1.0, 1.0);
    render_heatmap(dir / "blob.png", f, "blob t=0");
    CHECK(fs::file_size(dir / "blob.png") > 500);
  }

  SUBCASE("colormap endpoints") {
    const auto lo = colormap(0.0);
    const auto hi = colormap(1.0);
    CHECK(static_cast<int>(lo[2]) > static_cast<int>(lo[0]));  // blue end
    CHECK(static_cast<int>(hi[0]) > static_cast<int>(hi[2]));  // red end
  }
}

TEST_CASE("injected conservation bug is caught by the criterion") {
  // Negative control: a stepper that leaks a little mass must fail.
  const auto corrupted = [](const CoreState& s, double dt, const CoreParams& p) {
    CoreState out = step(s, dt, p);
    out.u.values *= 1.0 + 1e-8;
    return out;
  };
  const auto result = rth::verify::conservation(rth::verify::Level::quick, corrupted);
  CHECK_FALSE(result.pass);
  CHECK(result.measured > result.threshold);

  const auto honest = rth::verify::conservation(rth::verify::Level::quick);
  CHECK(honest.pass);
}
