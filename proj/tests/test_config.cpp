#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgqmc/config.hpp"

using namespace dgqmc;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = (std::filesystem::temp_directory_path() /
            ("dgqmc_cfg_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".txt"))
               .string();
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("minimal config is fully defaulted") {
  TempFile file("mode = affine\n");
  const ExperimentConfig c = parse_config(file.path);
  CHECK(c.mode == FieldMode::affine);
  CHECK(c.a0 == 5.0);
  CHECK(c.decay == 1.3);
  CHECK(c.s == 100);
  CHECK(c.theta == -1);
  CHECK(c.mesh_m == 16);
  CHECK(c.degree == 1);
  CHECK(c.shifts == 16);
  CHECK(c.eta_analytic);
  CHECK(c.n_list.size() == 6);
  CHECK(c.n_list.front() == 16384);
  CHECK(c.n_list.back() == 524288);
  CHECK(c.vector_source == "cbc");
}

TEST_CASE("lognormal default base is 1") {
  TempFile file("mode = lognormal\n");
  CHECK(parse_config(file.path).a0 == 1.0);
  TempFile with_a0("mode = lognormal\na0 = 2.5\n");
  CHECK(parse_config(with_a0.path).a0 == 2.5);
}

TEST_CASE("full config round trip") {
  TempFile file(
      "mode = lognormal\n"
      "a0 = 1\n"
      "decay = 1.3\n"
      "s = 20\n"
      "mesh_m = 8\n"
      "degree = 1\n"
      "theta = 1\n"
      "eta = analytic\n"
      "n_list = 128,256,512,1024,2048,4096\n"
      "shifts = 8\n"
      "seed = 2024\n"
      "vector = cbc\n"
      "out = /tmp/table.txt\n"
      "# trailing comment\n");
  const ExperimentConfig c = parse_config(file.path);
  CHECK(c.mode == FieldMode::lognormal);
  CHECK(c.s == 20);
  CHECK(c.mesh_m == 8);
  CHECK(c.theta == 1);
  CHECK(c.eta_analytic);
  CHECK(c.n_list == std::vector<std::uint64_t>{128, 256, 512, 1024, 2048, 4096});
  CHECK(c.shifts == 8);
  CHECK(c.seed == 2024);
  CHECK(c.out == "/tmp/table.txt");
}

TEST_CASE("validation failures name the key") {
  TempFile theta2("theta = 2\n");
  CHECK_THROWS_WITH(parse_config(theta2.path),
                    Catch::Matchers::ContainsSubstring("theta"));

  TempFile bad_n("n_list = 100,200\n");
  CHECK_THROWS_WITH(parse_config(bad_n.path),
                    Catch::Matchers::ContainsSubstring("powers of two"));

  TempFile decreasing("n_list = 256,128\n");
  CHECK_THROWS_AS(parse_config(decreasing.path), validation_error);

  TempFile unknown("wibble = 3\n");
  CHECK_THROWS_WITH(parse_config(unknown.path),
                    Catch::Matchers::ContainsSubstring("wibble"));

  TempFile bad_eta("eta = -4\n");
  CHECK_THROWS_AS(parse_config(bad_eta.path), validation_error);

  TempFile bad_mode("mode = gaussian\n");
  CHECK_THROWS_AS(parse_config(bad_mode.path), validation_error);

  TempFile bad_shifts("shifts = 1\n");
  CHECK_THROWS_AS(parse_config(bad_shifts.path), validation_error);

  TempFile not_kv("mode affine\n");
  CHECK_THROWS_AS(parse_config(not_kv.path), validation_error);

  CHECK_THROWS_AS(parse_config("/nonexistent/config.txt"), io_error);
}

TEST_CASE("numeric eta override") {
  TempFile file("eta = 10\ntheta = 1\n");
  const ExperimentConfig c = parse_config(file.path);
  CHECK_FALSE(c.eta_analytic);
  CHECK(c.eta_value == 10.0);
}

TEST_CASE("manifest carries config echo and seed") {
  TempFile file("mode = affine\nseed = 99\n");
  const ExperimentConfig c = parse_config(file.path);
  const RunManifest m = make_manifest("qmc-run", c);
  std::ostringstream os;
  write_manifest(m, os);
  const std::string text = os.str();
  CHECK(text.find("seed = 99") != std::string::npos);
  CHECK(text.find("mode = affine") != std::string::npos);
  CHECK(text.find("version = ") != std::string::npos);
  CHECK(text.find("started = ") != std::string::npos);
}

TEST_CASE("file digest is stable and content sensitive") {
  TempFile a("hello\n");
  TempFile b("hello\n");
  TempFile c("world\n");
  CHECK(file_digest(a.path) == file_digest(b.path));
  CHECK(file_digest(a.path) != file_digest(c.path));
}
