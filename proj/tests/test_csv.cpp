// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mbsplice/csv.hpp"
#include "mbsplice/model.hpp"

using namespace mbsplice;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("CSI round-trips bit-exactly through 17-digit CSV") {
  BandPlan plan = make_band_plan(4, 5, 312.5e3);
  SplitRng rng(3);
  Cir cir = draw_cir(rng, 2, 200e-9, 4.0);
  DistortionParams dist = draw_distortion(rng, plan, 960e-9);
  CsiMatrix csi = apply_distortion(synth_cfr(cir, plan), dist, plan,
                                   NoiseModel{100.0}, rng);

  std::string path = temp_path("mbsplice_csi_test.csv");
  write_csi(path, csi);
  CsiMatrix back = read_csi(path);
  CHECK(back.kind == CsiKind::distorted);
  REQUIRE(back.num_bands() == csi.num_bands());
  REQUIRE(back.subcarriers_per_band() == csi.subcarriers_per_band());
  for (int m = 0; m < csi.num_bands(); ++m)
    for (int j = 0; j < csi.subcarriers_per_band(); ++j)
      CHECK(back.values(m, j) == csi.values(m, j));
  std::remove(path.c_str());
}

TEST_CASE("CIR and handshake round-trips") {
  SplitRng rng(4);
  Cir cir = draw_cir(rng, 3, 300e-9, 4.0);
  std::string path = temp_path("mbsplice_cir_test.csv");
  write_cir(path, cir);
  Cir back = read_cir(path);
  REQUIRE(back.sparsity() == cir.sparsity());
  for (int k = 0; k < cir.sparsity(); ++k) {
    CHECK(back.taps[(size_t)k].delay == cir.taps[(size_t)k].delay);
    CHECK(back.taps[(size_t)k].gain == cir.taps[(size_t)k].gain);
  }
  std::remove(path.c_str());

  BandPlan plan = make_band_plan(4, 5, 312.5e3);
  DistortionParams dist = draw_distortion(rng, plan, 960e-9);
  HandshakeSamples hs = synth_handshake(cir, plan, dist, NoiseModel{100.0}, rng);
  std::string hs_path = temp_path("mbsplice_hs_test.csv");
  write_handshake(hs_path, hs);
  HandshakeSamples hs_back = read_handshake(hs_path);
  REQUIRE(hs_back.num_bands() == hs.num_bands());
  for (int m = 0; m < hs.num_bands(); ++m) {
    CHECK(hs_back.tx[(size_t)m] == hs.tx[(size_t)m]);
    CHECK(hs_back.rx[(size_t)m] == hs.rx[(size_t)m]);
  }
  std::remove(hs_path.c_str());
}

TEST_CASE("readers reject malformed input") {
  std::string path = temp_path("mbsplice_bad_test.csv");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("wrong,header\n1,2\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_cir(path), std::runtime_error);
  CHECK_THROWS_AS(read_csi(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_cir("/nonexistent/nowhere.csv"), std::runtime_error);
}
