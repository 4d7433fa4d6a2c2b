#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include "mzmesh/io.hpp"
#include "mzmesh/mesh.hpp"
#include "mzmesh/optimizer.hpp"

using namespace mzmesh;

namespace {

using C = std::complex<double>;

DeviceState random_device(int ports, int layers, std::uint64_t seed, double loss_db = -1.0) {
  MeshConfig cfg;
  if (loss_db >= 0.0) cfg.coupler.insertion_loss_db = loss_db;
  DeviceState dev = make_device(ports, layers, cfg);
  InitConfig init;
  init.seed = seed;
  dev.params = initialize_parameters(dev.topology, init);
  return dev;
}

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  Eigen::MatrixXcd out(m.n, m.n);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) out(i, j) = m.at(i, j);
  }
  return out;
}

}  // namespace

TEST_CASE("topology follows the alternating placement rule") {
  const NetworkTopology t23 = build_topology(2, 3);
  CHECK(t23.unit_count() == 3);
  for (const auto& layer : t23.layer_tops) {
    REQUIRE(layer.size() == 1);
    CHECK(layer[0] == 0);
  }

  const NetworkTopology t21 = build_topology(2, 1);
  CHECK(t21.unit_count() == 1);
  CHECK(t21.units[0].top_port == 0);
  CHECK(t21.units[0].layer == 1);

  const NetworkTopology t43 = build_topology(4, 3);
  CHECK(t43.unit_count() == 5);
  CHECK(t43.layer_tops[0] == std::vector<int>{0, 2});
  CHECK(t43.layer_tops[1] == std::vector<int>{1});
  CHECK(t43.layer_tops[2] == std::vector<int>{0, 2});

  CHECK_THROWS_AS(build_topology(1, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(2, 0), std::invalid_argument);
}

TEST_CASE("trainable parameter count matches the placement rule") {
  CHECK(trainable_parameter_count(2, 3, 5) == 72);
  CHECK(trainable_parameter_count(2, 6, 5) == 144);
  CHECK(trainable_parameter_count(4, 3, 5) == 120);
  CHECK_THROWS_AS(trainable_parameter_count(2, 3, 0), std::invalid_argument);

  // formula agrees with direct enumeration of the placement
  for (int ports = 2; ports <= 8; ++ports) {
    for (int layers = 1; layers <= 7; ++layers) {
      const NetworkTopology topo = build_topology(ports, layers);
      CHECK(trainable_parameter_count(ports, layers, 5) == 24L * topo.unit_count());
    }
  }
}

TEST_CASE("parameter index map is a bijection") {
  MeshConfig cfg;
  const NetworkTopology topo = build_topology(4, 3);
  const std::size_t total = static_cast<std::size_t>(topo.unit_count()) * cfg.params_per_unit();
  for (std::size_t i = 0; i < total; ++i) {
    const ParamCoords c = param_coords(cfg, i);
    CHECK(param_index(cfg, c.unit, c.taper, c.slot) == i);
    CHECK(is_length_slot(cfg, i) == (c.slot == cfg.interior_widths));
  }
}

TEST_CASE("device length accumulates one interferometer length per layer") {
  CHECK(device_length_um(make_device(2, 3)) == 240.0);
  CHECK(device_length_um(make_device(2, 6)) == 480.0);
  CHECK(MeshConfig{}.mzi_length_um() == 80.0);
}

TEST_CASE("balanced interferometer with lossless couplers is a pure cross state") {
  // the coupler table is exact at its nodes, so anchor the 50% point on one
  MeshConfig cfg;
  cfg.coupler.insertion_loss_db = 0.0;
  const CouplerSpectrum probe = build_coupler_table(0.0, cfg.coupler, cfg.neff);
  const double balanced = probe.wavelength_um[700];  // near 1.55 um
  cfg.coupler.anchor_wavelength_um = balanced;
  MziUnit unit;
  for (auto& taper : unit.tapers) taper.interior_widths_um.assign(5, 0.45);

  const Matrix2c t = mzi_transfer(unit, balanced, 0.0, cfg);
  CHECK(std::abs(t[0]) < 1e-10);           // |T11|
  CHECK(std::abs(t[3]) < 1e-10);           // |T22|
  CHECK(std::abs(std::abs(t[2]) - 1.0) < 1e-10);  // |T21|
  CHECK(std::abs(std::abs(t[1]) - 1.0) < 1e-10);
}

TEST_CASE("lossless interferometers are unitary for arbitrary tapers") {
  MeshConfig cfg;
  cfg.coupler.insertion_loss_db = 0.0;
  std::mt19937_64 rng(3);
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  MziUnit unit;
  for (auto& taper : unit.tapers) {
    for (int i = 0; i < 5; ++i) taper.interior_widths_um.push_back(uniform(0.40, 0.52));
    taper.length_um = uniform(6.0, 10.0);
  }
  // table nodes: interpolation is exact there, so the lossless coupler is
  // exactly on the unit circle (between nodes it sits inside by the
  // documented interpolation error)
  const CouplerSpectrum table = build_coupler_table(0.0, cfg.coupler, cfg.neff);
  for (std::size_t node : {220u, 500u, 700u, 860u}) {
    const double lambda = table.wavelength_um[node];
    const Matrix2c t = mzi_transfer(unit, lambda, table, cfg);
    const C dot00 = std::conj(t[0]) * t[0] + std::conj(t[2]) * t[2];
    const C dot01 = std::conj(t[0]) * t[1] + std::conj(t[2]) * t[3];
    const C dot11 = std::conj(t[1]) * t[1] + std::conj(t[3]) * t[3];
    CHECK(std::abs(dot00 - 1.0) < 1e-10);
    CHECK(std::abs(dot01) < 1e-10);
    CHECK(std::abs(dot11 - 1.0) < 1e-10);
  }
}

TEST_CASE("transfer matrix matches a hand-multiplied chain of the four factors") {
  const MeshConfig cfg;
  std::mt19937_64 rng(17);
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  MziUnit unit;
  for (auto& taper : unit.tapers) {
    for (int i = 0; i < 5; ++i) taper.interior_widths_um.push_back(uniform(0.40, 0.52));
    taper.length_um = uniform(6.0, 10.0);
  }

  const double lambda = 1.55;
  const CouplerSpectrum table = build_coupler_table(0.0, cfg.coupler, cfg.neff);
  const Matrix2c got = mzi_transfer(unit, lambda, table, cfg);

  // independent evaluation in the literal factor order
  const CouplerPoint cp = interpolate_coupler(table, lambda);
  const C f = std::exp(C(0.0, -cp.phase));
  const C coupler[4] = {C(cp.through, 0.0), C(0.0, -cp.cross), C(0.0, -cp.cross),
                        C(cp.through, 0.0)};
  double theta[4];
  for (int t = 0; t < 4; ++t) theta[t] = taper_phase(unit.tapers[t], lambda, cfg.neff);

  const auto matmul = [](const C* a, const C* b, C* out) {
    out[0] = a[0] * b[0] + a[1] * b[2];
    out[1] = a[0] * b[1] + a[1] * b[3];
    out[2] = a[2] * b[0] + a[3] * b[2];
    out[3] = a[2] * b[1] + a[3] * b[3];
  };
  const C d_in[4] = {std::exp(C(0.0, -theta[0])), 0.0, 0.0, std::exp(C(0.0, -theta[1]))};
  const C d_mid[4] = {std::exp(C(0.0, -theta[2])), 0.0, 0.0, std::exp(C(0.0, -theta[3]))};
  C fc[4], stage1[4], stage2[4], expected[4];
  for (int i = 0; i < 4; ++i) fc[i] = f * coupler[i];
  matmul(fc, d_mid, stage1);   // e^{-j phi} C D_mid
  matmul(stage1, fc, stage2);  // ... e^{-j phi} C
  matmul(stage2, d_in, expected);

  for (int i = 0; i < 4; ++i) CHECK(std::abs(got[i] - expected[i]) < 1e-12);
}

TEST_CASE("two-port network equals the explicit chain of unit matrices") {
  const DeviceState dev = random_device(2, 2, 99);
  const CouplerSpectrum table =
      build_coupler_table(0.0, dev.config.coupler, dev.config.neff);

  for (double lambda : {1.42, 1.5, 1.58}) {
    const ComplexMatrix s = network_scatter(dev, lambda);

    MziUnit first, second;
    for (int t = 0; t < 4; ++t) {
      first.tapers[t] = device_taper(dev, 0, static_cast<TaperPosition>(t));
      second.tapers[t] = device_taper(dev, 1, static_cast<TaperPosition>(t));
    }
    const Matrix2c t1 = mzi_transfer(first, lambda, table, dev.config);
    const Matrix2c t2 = mzi_transfer(second, lambda, table, dev.config);
    const C expected[4] = {t2[0] * t1[0] + t2[1] * t1[2], t2[0] * t1[1] + t2[1] * t1[3],
                           t2[2] * t1[0] + t2[3] * t1[2], t2[2] * t1[1] + t2[3] * t1[3]};
    CHECK(std::abs(s.at(0, 0) - expected[0]) < 1e-12);
    CHECK(std::abs(s.at(0, 1) - expected[1]) < 1e-12);
    CHECK(std::abs(s.at(1, 0) - expected[2]) < 1e-12);
    CHECK(std::abs(s.at(1, 1) - expected[3]) < 1e-12);
  }
}

TEST_CASE("two-port network is bit-identical to the layer-matrix chain") {
  const DeviceState dev = random_device(2, 3, 4242);
  const double lambda = 1.52;
  const ComplexMatrix s = network_scatter(dev, lambda);

  C acc[4] = {1.0, 0.0, 0.0, 1.0};
  for (int layer = 1; layer <= dev.topology.layers; ++layer) {
    const ComplexMatrix lm = layer_matrix(dev, layer, lambda);
    const C l[4] = {lm.at(0, 0), lm.at(0, 1), lm.at(1, 0), lm.at(1, 1)};
    const C next[4] = {l[0] * acc[0] + l[1] * acc[2], l[0] * acc[1] + l[1] * acc[3],
                       l[2] * acc[0] + l[3] * acc[2], l[2] * acc[1] + l[3] * acc[3]};
    for (int i = 0; i < 4; ++i) acc[i] = next[i];
  }
  CHECK(s.at(0, 0) == acc[0]);
  CHECK(s.at(0, 1) == acc[1]);
  CHECK(s.at(1, 0) == acc[2]);
  CHECK(s.at(1, 1) == acc[3]);
}

TEST_CASE("four-port network equals an independently embedded matrix chain") {
  const DeviceState dev = random_device(4, 3, 321);
  const CouplerSpectrum table =
      build_coupler_table(0.0, dev.config.coupler, dev.config.neff);

  for (double lambda : {1.44, 1.52, 1.61}) {
    const ComplexMatrix s = network_scatter(dev, lambda);

    // oracle: embed each unit's transfer matrix into an identity and chain
    // with Eigen, layer by layer
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(4, 4);
    for (int u = 0; u < dev.topology.unit_count(); ++u) {
      MziUnit unit;
      for (int t = 0; t < 4; ++t) {
        unit.tapers[t] = device_taper(dev, u, static_cast<TaperPosition>(t));
      }
      const Matrix2c block = mzi_transfer(unit, lambda, table, dev.config);
      Eigen::MatrixXcd layer = Eigen::MatrixXcd::Identity(4, 4);
      const int p = dev.topology.units[u].top_port;
      layer(p, p) = block[0];
      layer(p, p + 1) = block[1];
      layer(p + 1, p) = block[2];
      layer(p + 1, p + 1) = block[3];
      acc = layer * acc;
    }
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) CHECK(std::abs(s.at(i, j) - acc(i, j)) < 1e-12);
    }
  }
}

TEST_CASE("lossless networks are unitary, lossy networks passive") {
  const CouplerSpectrum nodes = build_coupler_table(0.0);
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const int ports = (trial % 2 == 0) ? 2 : 4;
    const int layers = 1 + static_cast<int>(rng() % 4);

    const DeviceState lossless = random_device(ports, layers, rng(), 0.0);
    const DeviceState lossy = random_device(ports, layers, rng());
    for (int k = 0; k < 5; ++k) {
      // unitarity at table nodes, where the interpolated coupler is exact
      const double node_lambda = nodes.wavelength_um[100 + rng() % 800];
      const Eigen::MatrixXcd s = to_eigen(network_scatter(lossless, node_lambda));
      const Eigen::MatrixXcd gram = s.adjoint() * s;
      const double err =
          (gram - Eigen::MatrixXcd::Identity(ports, ports)).cwiseAbs().maxCoeff();
      CHECK(err < 1e-10);

      // passivity everywhere: interpolation only moves the coupler inward
      const double lambda = 1.3 + 0.35 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const Eigen::MatrixXcd sl = to_eigen(network_scatter(lossy, lambda));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sl.adjoint() * sl);
      CHECK(std::sqrt(eig.eigenvalues().maxCoeff()) <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("swapping two pass-through ports leaves a layer matrix unchanged") {
  // layer 2 of a 6-port mesh pairs (1,2) and (3,4); ports 0 and 5 pass through
  const DeviceState dev = random_device(6, 2, 5);
  const ComplexMatrix lm = layer_matrix(dev, 2, 1.5);
  CHECK(lm.at(0, 0) == C(1.0, 0.0));
  CHECK(lm.at(5, 5) == C(1.0, 0.0));
  for (int j = 1; j < 6; ++j) CHECK(lm.at(0, j) == C(0.0, 0.0));
  for (int j = 0; j < 5; ++j) CHECK(lm.at(5, j) == C(0.0, 0.0));
  for (int i = 1; i < 6; ++i) CHECK(lm.at(i, 0) == C(0.0, 0.0));
  for (int i = 0; i < 5; ++i) CHECK(lm.at(i, 5) == C(0.0, 0.0));

  // exchanging the two pass-through labels is the identity on the matrix
  ComplexMatrix permuted = lm;
  std::swap(permuted.at(0, 0), permuted.at(5, 5));
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) CHECK(permuted.at(i, j) == lm.at(i, j));
  }
}

TEST_CASE("spectra conserve power exactly at the loss budget") {
  // sampled at coupler-table nodes, where the tabulated response is exact
  const CouplerSpectrum nodes = build_coupler_table(0.0);
  std::vector<double> grid;
  for (std::size_t i = 420; i <= 800; i += 25) grid.push_back(nodes.wavelength_um[i]);

  const DeviceState lossless = random_device(2, 3, 31, 0.0);
  for (const auto& row : simulate_spectrum(lossless, grid, 1, nullptr)) {
    CHECK(row[0] + row[1] == doctest::Approx(1.0).epsilon(1e-10));
  }

  const DeviceState lossy = random_device(2, 3, 31);
  const double a = lossy.config.coupler.amplitude();
  const double budget = std::pow(a, 12.0);  // six couplers traversed
  for (const auto& row : simulate_spectrum(lossy, grid, 1, nullptr)) {
    const double total = row[0] + row[1];
    CHECK(total <= budget + 1e-10);
    CHECK(total >= 0.0);
    for (double v : row) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("a balanced unit routes all power to the cross port") {
  MeshConfig cfg;
  cfg.coupler.insertion_loss_db = 0.0;
  const CouplerSpectrum probe = build_coupler_table(0.0, cfg.coupler, cfg.neff);
  const double balanced = probe.wavelength_um[700];
  cfg.coupler.anchor_wavelength_um = balanced;

  const DeviceState dev = make_device(2, 1, cfg);
  const double lambda[1] = {balanced};
  const auto spectrum = simulate_spectrum(dev, lambda, 0, nullptr);
  CHECK(spectrum[0][0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(spectrum[0][1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("geometry export and import reproduce the device bit for bit") {
  const DeviceState dev = random_device(4, 3, 77);
  const auto path = std::filesystem::temp_directory_path() / "mzmesh_geometry_test.json";
  write_geometry_json(path, dev);
  const DeviceState back = read_geometry_json(path);

  CHECK(back.topology.ports == dev.topology.ports);
  CHECK(back.topology.layers == dev.topology.layers);
  CHECK(back.etch_offset_nm == dev.etch_offset_nm);
  REQUIRE(back.params.size() == dev.params.size());
  for (std::size_t i = 0; i < dev.params.size(); ++i) CHECK(back.params[i] == dev.params[i]);

  std::vector<double> grid;
  for (int i = 0; i < 8; ++i) grid.push_back(1.45 + 0.15 * i / 7.0);
  const auto original = simulate_spectrum(dev, grid, 2, nullptr);
  const auto reloaded = simulate_spectrum(back, grid, 2, nullptr);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    for (int k = 0; k < 4; ++k) CHECK(original[q][k] == reloaded[q][k]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("a device without units scatters as the identity") {
  DeviceState dev;
  dev.topology.ports = 3;
  dev.topology.layers = 0;  // empty product limit
  const ComplexMatrix s = network_scatter(dev, 1.5);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(s.at(i, j) == (i == j ? C(1.0, 0.0) : C(0.0, 0.0)));
    }
  }
}

TEST_CASE("device and objective validation reject malformed input") {
  DeviceState dev = make_device(2, 2);
  dev.params.pop_back();
  CHECK_THROWS_AS(dev.validate(), std::invalid_argument);

  const DeviceState ok = make_device(2, 2);
  const double grid[2] = {1.5, 1.55};
  CHECK_THROWS_AS(simulate_spectrum(ok, grid, 7, nullptr), std::invalid_argument);
}
