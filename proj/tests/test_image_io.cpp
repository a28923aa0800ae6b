#include "helpers.hpp"

#include "mgmvs/error.hpp"
#include "mgmvs/image.hpp"
#include "mgmvs/io.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace mgmvs;

TEST_CASE("bilinear sampling of grids") {
  Grid g(2, 2);
  g << 2, 4, 6, 8;
  CHECK(*bilinear_sample(g, PixelCoord(1, 0)) == 4);
  CHECK(*bilinear_sample(g, PixelCoord(0.5, 0)) == doctest::Approx(3));
  CHECK(*bilinear_sample(g, PixelCoord(0.5, 0.5)) == doctest::Approx(5));
  CHECK(*bilinear_sample(g, PixelCoord(1, 1)) == 8);
  CHECK_FALSE(bilinear_sample(g, PixelCoord(-0.5, 0)).has_value());
  CHECK_FALSE(bilinear_sample(g, PixelCoord(0, 1.01)).has_value());
  // Round-off beyond the border is tolerated.
  CHECK(*bilinear_sample(g, PixelCoord(1 + 1e-12, -1e-12)) == 4);
}

TEST_CASE("bilinear sampling of feature maps matches per-channel sampling") {
  FeatureMap f(3, 4, 5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < f.values.size(); ++i) f.values.data()[i] = n(rng);
  const PixelCoord c(2.3, 1.7);
  const Eigen::VectorXd v = *bilinear_sample(f, c);
  for (int ch = 0; ch < 3; ++ch)
    CHECK(v(ch) == doctest::Approx(*bilinear_sample(f.channel(ch), c)).epsilon(1e-14));
  CHECK_FALSE(bilinear_sample(f, PixelCoord(4.5, 0)).has_value());
}

TEST_CASE("resize keeps constants and box downsampling averages blocks") {
  const Grid c = Grid::Constant(8, 12, 3.5);
  CHECK((resize_bilinear(c, 3, 5) - 3.5).abs().maxCoeff() < 1e-15);
  Grid g(2, 4);
  g << 1, 3, 5, 7, 1, 3, 5, 7;
  const Grid b = box_downsample(g, 2);
  REQUIRE(b.rows() == 1);
  CHECK(b(0, 0) == 2);
  CHECK(b(0, 1) == 6);
  // Halving with half-pixel centers equals the 2x2 block mean for linear data.
  Grid ramp(4, 4);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 4; ++u) ramp(v, u) = u + 10 * v;
  CHECK((resize_bilinear(ramp, 2, 2) - box_downsample(ramp, 2)).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(box_downsample(ramp, 3), Error);
}

TEST_CASE("sobel magnitude of a vertical step") {
  Grid g = Grid::Zero(5, 6);
  g.rightCols(3) = 1;
  const Grid s = sobel_magnitude(g);
  CHECK(s(2, 0) == 0);
  CHECK(s(2, 2) == doctest::Approx(4));
  CHECK(s(2, 3) == doctest::Approx(4));
  CHECK(s(2, 5) == 0);
  CHECK(sobel_magnitude(Grid::Constant(4, 4, 2)).maxCoeff() == 0);
}

TEST_CASE("pfm round trip is bit exact for float values") {
  const auto dir = test::temp_dir("pfm");
  Grid g(3, 4);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = float(0.1 * i + 425.25);
  write_pfm(dir / "a.pfm", g);
  const Grid back = read_pfm(dir / "a.pfm");
  CHECK((back - g).abs().maxCoeff() == 0);
  // Rows are stored bottom to top.
  std::ifstream in(dir / "a.pfm", std::ios::binary);
  std::string magic, scale;
  int w, h;
  in >> magic >> w >> h >> scale;
  in.get();
  float first;
  in.read(reinterpret_cast<char*>(&first), 4);
  CHECK(magic == "Pf");
  CHECK(scale == "-1");
  CHECK(first == float(g(2, 0)));
}

TEST_CASE("malformed pfm is rejected") {
  const auto dir = test::temp_dir("pfm_bad");
  std::ofstream(dir / "bad.pfm") << "Pf\n4 3\n-1\nxx";
  try {
    read_pfm(dir / "bad.pfm");
    FAIL("expected MalformedFile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedFile);
  }
  CHECK_THROWS_AS(read_pfm(dir / "missing.pfm"), Error);
}

TEST_CASE("ppm round trip within 16-bit quantization") {
  const auto dir = test::temp_dir("ppm");
  Grid g(3, 5);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = i / 14.0;
  write_ppm(dir / "a.ppm", g);
  CHECK((read_ppm(dir / "a.ppm") - g).abs().maxCoeff() <= 0.5 / 65535 + 1e-12);
  std::ofstream(dir / "gray.pgm") << "P2\n2 1\n255\n0 255\n";
  const Grid gray = read_ppm(dir / "gray.pgm");
  CHECK(gray(0, 0) == 0);
  CHECK(gray(0, 1) == doctest::Approx(1));
}

TEST_CASE("key value files") {
  std::istringstream in("# comment\n a = 1 \n\nb=two # trailing\n");
  const KeyValueFile f = parse_key_values(in);
  CHECK(f.at("a") == "1");
  CHECK(f.at("b") == "two");
  CHECK(f.entries.at("b").line == 4);
  CHECK_THROWS_AS(f.at("c"), Error);

  std::istringstream bad("a=1\nnonsense\n");
  try {
    parse_key_values(bad);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream dup("a=1\na=2\n");
  CHECK_THROWS_AS(parse_key_values(dup), Error);
}
