#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fairflow/engine.hpp"
#include "fairflow/exemplars/melt.hpp"
#include "fairflow/exemplars/pn.hpp"
#include "helpers.hpp"
#include "tmpdir.hpp"

using namespace fairflow;

namespace {

fs::path melt_bundle() { return fs::path(FAIRFLOW_EXEMPLARS_DIR) / "meltsurrogate"; }
fs::path pn_bundle() { return fs::path(FAIRFLOW_EXEMPLARS_DIR) / "pnjunction_lite"; }

melt::Trace linear_trace(double t0_fs, double t_step_fs, size_t n, double temp0,
                         double temp_step) {
  melt::Trace tr;
  for (size_t i = 0; i < n; ++i) {
    tr.t_fs.push_back(t0_fs + t_step_fs * static_cast<double>(i));
    tr.temp_k.push_back(temp0 + temp_step * static_cast<double>(i));
  }
  return tr;
}

}  // namespace

TEST_CASE("coexistence band is inclusive at 0.35 and 0.65", "[exemplars][melt]") {
  // solid fraction sweeps the boundary; liquid takes the complement of 0.98
  auto with_solid = [](double solid) { return melt::coexistence_rule(solid, 0.98 - solid); };
  CHECK_FALSE(with_solid(0.34));
  CHECK(with_solid(0.35));
  CHECK(with_solid(0.50));
  CHECK(with_solid(0.63));  // liquid = 0.35: boundary on the liquid side
  CHECK_FALSE(with_solid(0.66));
  CHECK_FALSE(melt::coexistence_rule(0.50, 0.20));  // both must sit in the band
  CHECK_FALSE(melt::coexistence_rule(0.80, 0.18));
  CHECK(melt::coexistence_rule(0.65, 0.35));  // exactly the corners
  CHECK(melt::coexistence_rule(0.35, 0.65));
}

TEST_CASE("steady-state slope test is inclusive at 10 K/ps", "[exemplars][melt]") {
  // 21 samples, 1 ps apart: integer picosecond time base keeps the
  // least-squares slope exact, so the boundary case is sharp.
  melt::TraceAnalysis at10 = melt::analyze_trace(linear_trace(0, 1000, 21, 1000, 10.0));
  CHECK(at10.slope_k_per_ps == 10.0);  // exactly
  CHECK(at10.steady_state);

  CHECK_FALSE(melt::analyze_trace(linear_trace(0, 1000, 21, 1000, 10.1)).steady_state);
  CHECK(melt::analyze_trace(linear_trace(0, 1000, 21, 1000, 9.9)).steady_state);
  CHECK(melt::analyze_trace(linear_trace(0, 1000, 21, 1000, -9.9)).steady_state);
  CHECK_FALSE(melt::analyze_trace(linear_trace(0, 1000, 21, 1000, -10.1)).steady_state);
  CHECK_FALSE(melt::analyze_trace(linear_trace(0, 1000, 21, 1000, 25.0)).steady_state);
}

TEST_CASE("analysis window is the trailing 20 ps", "[exemplars][melt]") {
  // 51 samples over 50 ps: wild half followed by a flat 1000 K plateau
  melt::Trace tr;
  for (int i = 0; i <= 50; ++i) {
    tr.t_fs.push_back(1000.0 * i);
    tr.temp_k.push_back(i < 30 ? 5000.0 : 1000.0);
  }
  melt::TraceAnalysis a = melt::analyze_trace(tr);
  CHECK(a.window_samples == 21);
  CHECK(a.melting_temperature_k == 1000.0);
  CHECK(a.slope_k_per_ps == 0.0);
  CHECK(a.confidence_95_k == 0.0);
  CHECK(a.steady_state);

  // confidence interval: hand-evaluated 1.96 sigma / sqrt(n) on +-10 K flips
  melt::Trace flips;
  for (int i = 0; i < 20; ++i) {
    flips.t_fs.push_back(1000.0 * i);
    flips.temp_k.push_back(1000.0 + ((i % 2 == 0) ? 10.0 : -10.0));
  }
  melt::TraceAnalysis af = melt::analyze_trace(flips);
  CHECK(af.melting_temperature_k == 1000.0);
  double expected_ci = 1.96 * std::sqrt(20.0 * 100.0 / 19.0) / std::sqrt(20.0);
  CHECK(af.confidence_95_k == Catch::Approx(expected_ci).epsilon(1e-12));
}

TEST_CASE("trace synthesis is a pure function of (conditions, seed)", "[exemplars][melt]") {
  melt::MeltConditions c;
  c.melt_point_k = 1357.77;
  c.t_solid_k = 1200;
  c.t_liquid_k = 1500;
  c.run_time_fs = 50000;

  melt::Trace a = melt::synth_trace(c, 42);
  melt::Trace b = melt::synth_trace(c, 42);
  CHECK(a.t_fs == b.t_fs);
  CHECK(a.temp_k == b.temp_k);  // bitwise equal: same seed, same everything
  REQUIRE(a.t_fs.size() == 501);
  CHECK(a.t_fs.front() == 0.0);
  CHECK(a.t_fs.back() == 50000.0);

  melt::Trace other = melt::synth_trace(c, 43);
  CHECK(a.temp_k != other.temp_k);

  // the relaxation target: defaults settle near the material melting point
  melt::TraceAnalysis analysis = melt::analyze_trace(a);
  CHECK(analysis.melting_temperature_k > 1300.0);
  CHECK(analysis.melting_temperature_k < 1400.0);
  CHECK(analysis.steady_state);

  // seeds derive from input bytes deterministically
  CHECK(melt::seed_from_bytes("abc") == melt::seed_from_bytes("abc"));
  CHECK(melt::seed_from_bytes("abc") != melt::seed_from_bytes("abd"));
}

TEST_CASE("phase fractions: logistic split with a fixed other bucket", "[exemplars][melt]") {
  melt::MeltConditions c;
  c.melt_point_k = 1357.77;
  c.t_solid_k = 1200;
  c.t_liquid_k = 1500;

  melt::PhaseFractions mid = melt::phase_fractions(c.melt_point_k, c);
  CHECK(mid.solid == Catch::Approx(0.49).epsilon(1e-12));
  CHECK(mid.liquid == Catch::Approx(0.49).epsilon(1e-12));
  CHECK(mid.other == 0.02);
  CHECK(melt::coexistence_rule(mid.solid, mid.liquid));

  melt::PhaseFractions cold = melt::phase_fractions(600.0, c);
  CHECK(cold.solid > 0.9);
  CHECK_FALSE(melt::coexistence_rule(cold.solid, cold.liquid));
  melt::PhaseFractions hot = melt::phase_fractions(2500.0, c);
  CHECK(hot.liquid > 0.9);
  CHECK_FALSE(melt::coexistence_rule(hot.solid, hot.liquid));
  CHECK(mid.solid + mid.liquid + mid.other == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PNG snapshots carry the right magic and parse as images", "[exemplars][melt]") {
  melt::MeltConditions c;
  c.melt_point_k = 1357.77;
  c.t_solid_k = 1200;
  c.t_liquid_k = 1500;
  melt::Trace tr = melt::synth_trace(c, 7);
  melt::PhaseFractions f = melt::phase_fractions(1357.0, c);

  std::string png1 = melt::render_snapshot(tr, f);
  std::string png2 = melt::render_snapshot(tr, f);
  CHECK(png1 == png2);  // byte-deterministic encoding
  CHECK(png1.substr(0, 8) == std::string("\x89PNG\r\n\x1a\n", 8));

  TempDir tmp;
  write_file(tmp / "snap.png", png1);
  InputSpec img;
  img.kind = Kind::Image;
  TypedValue tv = validate_value(img, json({{"file", "snap.png"}}), tmp.path);
  CHECK(tv.as_image().format == "PNG");
  CHECK(tv.as_image().bytes == png1.size());
}

TEST_CASE("built-in potential matches the frozen hand oracle", "[exemplars][pn]") {
  // independently evaluated before the build:
  //   Vt(300 K)                       = 0.025851999786435535 V
  //   V_bi(Si, 1e16*1e16, n_i=1e10)   = 0.7143171519879805 V
  //   V_bi(Ge, 1e16*1e16, n_i=2.4e13) = 0.31189334077178227 V
  CHECK(pn::thermal_voltage(300.0) ==
        Catch::Approx(0.025851999786435535).epsilon(1e-12));
  CHECK(pn::built_in_potential(1e16, 1e16, 1.0e10, 300.0) ==
        Catch::Approx(0.7143171519879805).epsilon(1e-9));
  // same doping product, same V_bi
  CHECK(pn::built_in_potential(1e17, 1e15, 1.0e10, 300.0) ==
        Catch::Approx(0.7143171519879805).epsilon(1e-9));
  CHECK(pn::built_in_potential(1e16, 1e16, 2.4e13, 300.0) ==
        Catch::Approx(0.31189334077178227).epsilon(1e-9));
}

TEST_CASE("depletion width and its split match the frozen oracles", "[exemplars][pn]") {
  double v_bi = pn::built_in_potential(1e16, 1e16, 1.0e10, 300.0);
  // frozen: W(V=0) = 0.4298210035433546 um, W(V=-2) = 0.8378617994640655 um
  CHECK(pn::depletion_width_m(11.7, v_bi, 0.0, 1e16, 1e16) * 1e6 ==
        Catch::Approx(0.4298210035433546).epsilon(1e-9));
  CHECK(pn::depletion_width_m(11.7, v_bi, -2.0, 1e16, 1e16) * 1e6 ==
        Catch::Approx(0.8378617994640655).epsilon(1e-9));
  // the approximation collapses at/past the built-in potential
  CHECK(pn::depletion_width_m(11.7, v_bi, v_bi, 1e16, 1e16) == 0.0);
  CHECK(pn::depletion_width_m(11.7, v_bi, v_bi + 0.5, 1e16, 1e16) == 0.0);

  // asymmetric case, frozen: W = 0.9659025728247301 um, x_p share 1/101
  double v_bi2 = pn::built_in_potential(1e17, 1e15, 1.0e10, 300.0);
  double w2_um = pn::depletion_width_m(11.7, v_bi2, 0.0, 1e17, 1e15) * 1e6;
  CHECK(w2_um == Catch::Approx(0.9659025728247301).epsilon(1e-9));

  pn::DeviceRequest req;
  req.material = {"Si", 1.0e10, 11.7, 1.12, 1e-12};
  req.na_cm3 = 1e17;
  req.nd_cm3 = 1e15;
  pn::DeviceSolution asym = pn::solve_device(req);
  CHECK(asym.x_p_um == Catch::Approx(w2_um / 101.0).epsilon(1e-12));
  CHECK(asym.x_n_um == Catch::Approx(w2_um * 100.0 / 101.0).epsilon(1e-12));

  // symmetric doping splits the region exactly in half
  req.na_cm3 = req.nd_cm3 = 1e16;
  pn::DeviceSolution sym = pn::solve_device(req);
  CHECK(sym.x_p_um == sym.x_n_um);
  CHECK(sym.x_p_um == Catch::Approx(sym.w_um / 2.0).epsilon(1e-12));
}

TEST_CASE("ideal diode: exact zero at zero bias, frozen sweep oracles", "[exemplars][pn]") {
  CHECK(pn::diode_current_a(1e-12, 0.0, 300.0) == 0.0);  // exactly, via expm1
  // frozen: I(+0.3 V) = 1.0959083160312857e-07 A, I(-0.3 V) = -9.999908752323474e-13 A
  CHECK(pn::diode_current_a(1e-12, 0.3, 300.0) ==
        Catch::Approx(1.0959083160312857e-07).epsilon(1e-9));
  CHECK(pn::diode_current_a(1e-12, -0.3, 300.0) ==
        Catch::Approx(-9.999908752323474e-13).epsilon(1e-9));

  CHECK(pn::sweep_points(-0.5, 0.5, 0.05).size() == 21);
  CHECK(pn::sweep_points(0.0, 1.0, 0.1).size() == 11);
  CHECK(pn::sweep_points(0.0, 1.0, 0.3).size() == 4);
  CHECK(pn::sweep_points(0.25, 0.25, 0.1) == std::vector<double>{0.25});
  CHECK_THROWS_WITH_CODE(pn::sweep_points(0.0, 1.0, 0.0), Errc::degenerate_sweep);
  CHECK_THROWS_WITH_CODE(pn::sweep_points(0.0, 1.0, -0.1), Errc::degenerate_sweep);
  CHECK_THROWS_WITH_CODE(pn::sweep_points(1.0, 0.0, 0.1), Errc::degenerate_sweep);
}

TEST_CASE("device solution: grids, bands, charge balance", "[exemplars][pn]") {
  pn::DeviceRequest req;
  req.material = {"Si", 1.0e10, 11.7, 1.12, 1e-12};
  pn::DeviceSolution sol = pn::solve_device(req);

  REQUIRE(sol.iv.size() == 21);  // -0.5..0.5 by 0.05
  CHECK(sol.iv.front()[0] == -0.5);
  CHECK(sol.iv.back()[0] == Catch::Approx(0.5).epsilon(1e-12));
  // the V=0 row carries I exactly 0
  bool found_zero = false;
  for (const auto& row : sol.iv)
    if (row[0] == 0.0) {
      CHECK(row[1] == 0.0);
      found_zero = true;
    }
  CHECK(found_zero);
  // forward current is monotone increasing
  for (size_t i = 1; i < sol.iv.size(); ++i) CHECK(sol.iv[i][1] > sol.iv[i - 1][1]);

  REQUIRE(sol.band_edges.size() == static_cast<size_t>(req.p_points + req.n_points));
  double ef = sol.band_edges.front()[4];
  for (const auto& row : sol.band_edges) {
    CHECK(row[1] - row[2] == Catch::Approx(1.12).epsilon(1e-12));  // Ec - Ev = Eg
    CHECK(row[3] == Catch::Approx((row[1] + row[2]) / 2).margin(1e-12));  // Ei centered
    CHECK(row[4] == ef);  // flat Fermi level at equilibrium
  }
  // intrinsic level drops by V_bi across the junction
  CHECK(sol.band_edges.front()[3] == 0.0);
  CHECK(sol.band_edges.back()[3] == Catch::Approx(-sol.v_bi).epsilon(1e-12));
  // positions run from -L_p to +L_n with the junction at zero
  CHECK(sol.band_edges.front()[0] == -5.0);
  CHECK(sol.band_edges.back()[0] == 5.0);

  // charge density: negative acceptors on the p side, positive donors on n,
  // zero in the neutral bulk
  REQUIRE(sol.charge_density.size() == sol.band_edges.size());
  double q_na = -pn::kElementaryCharge * 1e16;
  bool saw_neg = false, saw_pos = false;
  for (const auto& row : sol.charge_density) {
    if (row[0] < -sol.x_p_um - 1e-9 || row[0] > sol.x_n_um + 1e-9) {
      CHECK(row[1] == 0.0);
    } else if (row[1] != 0.0) {
      if (row[0] < 0) {
        CHECK(row[1] == q_na);
        saw_neg = true;
      } else {
        CHECK(row[1] == -q_na);
        saw_pos = true;
      }
    }
  }
  CHECK(saw_neg);
  CHECK(saw_pos);
}

TEST_CASE("meltsurrogate runs end-to-end with byte-identical envelopes",
          "[exemplars][engine]") {
  TempDir tmp;
  Engine engine(tmp / "home");
  engine.registry().publish(melt_bundle(), "Exemplar Authors", "surrogate references");

  RunRequest req;
  req.tool = "meltsurrogate";
  req.cache = CachePolicy::bypass_both;
  RunOutcome first = engine.run(req);
  CHECK(first.record.status == "completed");
  CHECK(first.warnings.empty());

  // default Cu settings land on the coexistence plateau
  double mt = first.outputs.at("melting_temperature").as_number().value;
  CHECK(mt > 1300.0);
  CHECK(mt < 1400.0);
  CHECK(first.outputs.at("coexistence").as_bool());
  CHECK(first.outputs.at("steady_state").as_bool());
  CHECK(first.outputs.at("confidence_95").as_number().value > 0.0);
  json fractions = first.outputs.at("phase_fractions").as_json();
  double sum = fractions["solid"].get<double>() + fractions["liquid"].get<double>() +
               fractions["other"].get<double>();
  CHECK(sum == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(first.outputs.at("final_snapshot").as_image().format == "PNG");

  // purity: a second execution (not a cache replay) emits identical bytes
  RunOutcome second = engine.run(req);
  CHECK_FALSE(second.cache_hit);
  for (const char* name : {"melting_temperature.json", "confidence_95.json",
                           "coexistence.json", "steady_state.json", "phase_fractions.json",
                           "final_snapshot.json", "final_snapshot.png"}) {
    INFO("envelope " << name);
    CHECK(read_file(first.run_dir / "_outputs" / name) ==
          read_file(second.run_dir / "_outputs" / name));
  }

  // cold thermostats freeze the cell: no coexistence
  RunRequest cold;
  cold.tool = "meltsurrogate";
  cold.cache = CachePolicy::bypass_both;
  cold.overrides = {{"T_solid", json(300)}, {"T_liquid", json(600)},
                    {"material", json("Al")}, {"mass", json("Al")}};
  RunOutcome frozen = engine.run(cold);
  CHECK_FALSE(frozen.outputs.at("coexistence").as_bool());
  json cold_fracs = frozen.outputs.at("phase_fractions").as_json();
  CHECK(cold_fracs["solid"].get<double>() > 0.65);

  // element aliases and unit respellings reach the same canonical inputs
  RunRequest aliased;
  aliased.tool = "meltsurrogate";
  aliased.overrides = {{"mass", json("copper")}, {"lattice_constant", json("0.3615 nm")}};
  RunOutcome c1 = engine.run(aliased);
  CHECK_FALSE(c1.cache_hit);
  RunRequest plain;
  plain.tool = "meltsurrogate";
  plain.overrides = {{"mass", json("Cu")}, {"lattice_constant", json(3.615)}};
  RunOutcome c2 = engine.run(plain);
  CHECK(c2.cache_hit);  // same key: "copper" == Cu, 0.3615 nm == 3.615 angstrom
  CHECK(c2.record.cache_key == c1.record.cache_key);
}

TEST_CASE("pnjunction_lite runs end-to-end", "[exemplars][engine]") {
  TempDir tmp;
  Engine engine(tmp / "home");
  engine.registry().publish(pn_bundle());

  RunRequest req;
  req.tool = "pnjunction_lite";
  RunOutcome out = engine.run(req);
  CHECK(out.record.status == "completed");

  // frozen oracle survives the full envelope round-trip
  CHECK(out.outputs.at("depletion_width").as_number().value ==
        Catch::Approx(0.4298210035433546).epsilon(1e-9));
  const ArrayValue& iv = out.outputs.at("iv_characteristic").as_array();
  REQUIRE(iv.shape == std::vector<size_t>{21, 2});
  // sweep invariant: one row per sweep point, V=0 row exactly zero current
  bool found = false;
  for (size_t r = 0; r < 21; ++r)
    if (iv.data[2 * r] == 0.0) {
      CHECK(iv.data[2 * r + 1] == 0.0);
      found = true;
    }
  CHECK(found);
  CHECK(out.outputs.at("band_edges").as_array().shape == std::vector<size_t>{120, 5});
  CHECK(out.outputs.at("charge_density").as_array().shape == std::vector<size_t>{120, 2});

  // row count follows the sweep: 0..1 by 0.1 -> 11 points
  RunRequest wide;
  wide.tool = "pnjunction_lite";
  wide.overrides = {{"v_start", json(0)}, {"v_stop", json(1)}, {"v_step", json(0.1)}};
  CHECK(engine.run(wide).outputs.at("iv_characteristic").as_array().shape ==
        std::vector<size_t>{11, 2});

  // a degenerate sweep fails the step and is recorded as such
  RunRequest degenerate;
  degenerate.tool = "pnjunction_lite";
  degenerate.overrides = {{"v_step", json(0)}};
  try {
    engine.run(degenerate);
    FAIL("expected StepFailed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::step_failed);
    CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
  }
  auto failed = engine.db().query(parse_predicate("status = failed"), nullptr);
  REQUIRE(failed.size() == 1);
  CHECK(failed[0].status == "failed:StepFailed");

  // region lengths accept any length unit: 5000 nm == 5 um
  RunRequest nm_len;
  nm_len.tool = "pnjunction_lite";
  nm_len.overrides = {{"p_length", json("5000 nm")}};
  RunOutcome hit = engine.run(nm_len);
  CHECK(hit.cache_hit);  // identical canonical inputs as the default run
}
