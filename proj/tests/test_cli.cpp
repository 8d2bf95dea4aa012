#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "elastres/config.hpp"
#include "elastres/errors.hpp"

using namespace elastres;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {
fs::path work_dir() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "elastres_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

int run(const std::string& args, std::string* err = nullptr) {
  const fs::path log = work_dir() / "stderr.txt";
  const std::string cmd = std::string(ELASTRES_CLI_PATH) + " " + args + " > /dev/null 2> " + log.string();
  const int status = std::system(cmd.c_str());
  if (err) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *err = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kBase = "mesh.level = 2\ncache.dir = " ;
}  // namespace

TEST(Config, ParsesDottedKeys) {
  const Config c = Config::parse("# comment\nmedia.interior.mu = 2.5\n tau.values = 0.01, 0.001 \n", "test");
  EXPECT_DOUBLE_EQ(c.get_double("media.interior.mu", 0.0), 2.5);
  EXPECT_EQ(c.get_doubles("tau.values", {}).size(), 2u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(Config::parse("media.interior.mu 2.5\n", "test"), Error);
  EXPECT_THROW(Config::parse("a.b = 1\na.b = 2\n", "test"), Error);
  EXPECT_THROW(RunConfig::from(Config::parse("media.interior.nu = 1\n", "test")), Error);
}

TEST(Config, HashIgnoresOrderAndWhitespace) {
  const Config a = Config::parse("mesh.level = 2\ntau.values = 0.01\n", "a");
  const Config b = Config::parse("tau.values=0.01\n\nmesh.level   =  2\n", "b");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), Config::parse("mesh.level = 3\n", "c").hash());
}

TEST(Cli, NegativeMuIsConfigErrorNamingTheField) {
  const std::string cfg = write_config("bad.cfg", "media.interior.mu = -1\n");
  std::string err;
  EXPECT_EQ(run("--config " + cfg + " --out " + (work_dir() / "bad").string() + " effective", &err), 2);
  EXPECT_NE(err.find("media.interior.mu"), std::string::npos) << err;
}

TEST(Cli, UnknownKeyAndMissingFileAreConfigErrors) {
  const std::string cfg = write_config("unknown.cfg", "mesh.levle = 2\n");
  EXPECT_EQ(run("--config " + cfg + " spectrum"), 2);
  EXPECT_EQ(run("--config /nonexistent/file.cfg spectrum"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, MissingMeshFileIsConfigError) {
  const std::string cfg = write_config("mesh.cfg", "mesh.source = file\nmesh.file = /nonexistent.off\n");
  std::string err;
  EXPECT_EQ(run("--config " + cfg + " --out " + (work_dir() / "nomesh").string() + " spectrum", &err), 2);
  const json m = json::parse(slurp(work_dir() / "nomesh" / "MANIFEST.json"));
  EXPECT_EQ(m["status"], "failed");
  EXPECT_FALSE(m["failure_stage"].get<std::string>().empty());
}

TEST(Cli, ValidateSphereLevel2) {
  const fs::path out = work_dir() / "validate";
  const std::string cfg = write_config("validate.cfg", std::string(kBase) + (work_dir() / "cache").string() + "\n");
  ASSERT_EQ(run("--config " + cfg + " --out " + out.string() + " --cache validate"), 0);
  const json v = json::parse(slurp(out / "validation.json"));
  ASSERT_TRUE(v.contains("m1_eigenvalue_margins"));
  EXPECT_EQ(v["m1_eigenvalue_margins"].size(), 6u);
  const json m = json::parse(slurp(out / "MANIFEST.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["command"], "validate");
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_FALSE(m["version"].get<std::string>().empty());
}

TEST(Cli, EffectiveIsDeterministicAndCacheIsIdentical) {
  const std::string cfg = write_config("eff.cfg", std::string(kBase) + (work_dir() / "cache").string() + "\n");
  const fs::path a = work_dir() / "eff_a", b = work_dir() / "eff_b", c = work_dir() / "eff_c";
  ASSERT_EQ(run("--config " + cfg + " --out " + a.string() + " effective"), 0);
  ASSERT_EQ(run("--config " + cfg + " --out " + b.string() + " effective"), 0);
  ASSERT_EQ(run("--config " + cfg + " --out " + c.string() + " --cache effective"), 0);
  for (const char* f : {"effset.json", "ladder.json", "effective_report.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(c / f)) << f;
  }
  const json e = json::parse(slurp(a / "effset.json"));
  EXPECT_EQ(e["schema"], "effset-1");
  EXPECT_EQ(json::parse(slurp(a / "ladder.json"))["schema"], "ladder-1");
  std::ifstream op(a / "dtn0.elop", std::ios::binary);
  char magic[6];
  op.read(magic, 6);
  EXPECT_EQ(std::string(magic, 6), "ELOPv1");
}

TEST(Cli, FieldMonopoleWritesCsv) {
  const fs::path out = work_dir() / "field";
  const std::string cfg = write_config(
      "field.cfg", std::string(kBase) + (work_dir() / "cache").string() +
                       "\nfield.regime = monopole\nfield.points = 8\nfield.omega = 0.3\n");
  ASSERT_EQ(run("--config " + cfg + " --out " + out.string() + " --cache field"), 0);
  const std::string csv = slurp(out / "field.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_TRUE(fs::exists(out / "amplitude.json"));
}
