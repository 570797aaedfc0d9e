#include <doctest.h>

#include "oracles.hpp"
#include "setreg/representation.hpp"

using namespace setreg;

TEST_CASE("kernel taps") {
  for (double sigma : {0.4, 1.0, 2.5, 3.0, 8.0, 40.0}) {
    const GaussianKernel k(sigma);
    CHECK(k.radius() == static_cast<int>(std::ceil(3 * sigma)));
    double sum = 0.0;
    for (double w : k.weights()) sum += w;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    const auto& w = k.weights();
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == w[w.size() - 1 - i]);
  }
  CHECK_THROWS_AS(GaussianKernel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianKernel(-1.0), std::invalid_argument);
}

TEST_CASE("gaussian_blur") {
  SUBCASE("constant stays constant") {
    for (double sigma : {1.0, 8.0, 40.0}) {
      const ImageGrid out = gaussian_blur(ImageGrid(20, 11, 0.375), GaussianKernel(sigma));
      for (double v : out.pixels()) CHECK(v == doctest::Approx(0.375).epsilon(1e-14));
    }
  }
  SUBCASE("impulse gives the sampled Gaussian") {
    ImageGrid img(21, 21);
    img(10, 10) = 1.0;
    const GaussianKernel k(1.0);
    const ImageGrid out = gaussian_blur(img, k);
    const auto& w = k.weights();
    CHECK(out(10, 10) == doctest::Approx(w[3] * w[3]).epsilon(1e-14));
    const double norm = 1.0 / (2 * std::exp(-0.5) + 2 * std::exp(-2.0) + 2 * std::exp(-4.5) + 1.0);
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        CHECK(out(10 + dx, 10 + dy) ==
              doctest::Approx(norm * norm * std::exp(-0.5 * (dx * dx + dy * dy))).epsilon(1e-12));
    CHECK(out(14, 10) == 0.0);
  }
  SUBCASE("matches a direct 2D convolution") {
    std::mt19937_64 rng(11);
    const ImageGrid img = oracle::random_grid(rng, 32, 32);
    const ImageGrid out = gaussian_blur(img, GaussianKernel(2.0));
    const ImageGrid want = oracle::blur2d(img, 2.0);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out.pixels()[i] - want.pixels()[i]) <= 1e-9);
  }
}

TEST_CASE("abs_highpass") {
  std::mt19937_64 rng(12);
  SUBCASE("constant image gives zero") {
    const Representation r = abs_highpass(ImageGrid(30, 20, 0.7), 8.0, "c");
    for (double v : r.grid.pixels()) CHECK(v == 0.0);
    CHECK(r.sigma == 8.0);
    CHECK(r.source_id == "c");
  }
  SUBCASE("step edge and its polarity flip") {
    ImageGrid step(24, 10);
    for (int y = 0; y < 10; ++y)
      for (int x = 12; x < 24; ++x) step(x, y) = 1.0;
    ImageGrid flip = step;
    for (double& v : flip.pixels()) v = 1.0 - v;
    CHECK(abs_highpass(step, 3.0).grid == abs_highpass(flip, 3.0).grid);
  }
  SUBCASE("matches |I - blur| from the direct convolution") {
    const ImageGrid img = oracle::random_grid(rng, 64, 64);
    const ImageGrid z = abs_highpass(img, 8.0).grid;
    const ImageGrid want = oracle::abs_highpass(img, 8.0);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(z.pixels()[i] - want.pixels()[i]) <= 1e-9);
  }
  SUBCASE("rejects non-positive sigma") {
    CHECK_THROWS_AS(abs_highpass(ImageGrid(4, 4), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(abs_highpass(ImageGrid(4, 4), -2.0), std::invalid_argument);
  }
}

TEST_CASE("abs_highpass properties on random images") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> side(4, 48);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int t = 0; t < 30; ++t) {
    const int w = side(rng), h = side(rng);
    const ImageGrid img = oracle::dyadic_grid(rng, w, h);
    ImageGrid flip = img, lifted = img;
    for (double& v : flip.pixels()) v = 1.0 - v;
    const double c = shift(rng);
    for (double& v : lifted.pixels()) v += c;
    for (double sigma : {40.0, 20.0, 8.0, 3.0}) {
      const ImageGrid z = abs_highpass(img, sigma).grid;
      CHECK(z == abs_highpass(flip, sigma).grid);
      const ImageGrid zl = abs_highpass(lifted, sigma).grid;
      CHECK(z.same_shape(img));
      for (std::size_t i = 0; i < z.size(); ++i) {
        CHECK(z.pixels()[i] >= 0.0);
        CHECK(std::abs(z.pixels()[i] - zl.pixels()[i]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("pyramid schedule") {
  CHECK(PyramidSchedule().sigmas() == std::vector<double>{40, 20, 8, 3});
  CHECK_NOTHROW(PyramidSchedule({3.0}));
  CHECK_THROWS_AS(PyramidSchedule(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(PyramidSchedule({8, 8}), std::invalid_argument);
  CHECK_THROWS_AS(PyramidSchedule({3, 8}), std::invalid_argument);
  CHECK_THROWS_AS(PyramidSchedule({8, 0}), std::invalid_argument);
}
