#include "kpp/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string temp_path(const char* stem) {
  return std::string(::testing::TempDir()) + stem;
}

TEST(Config, ParseSectionsCommentsAndTypes) {
  const auto cfg = kpp::Config::parse(
      "top = 1\n"
      "[run]\n"
      "name = demo  # trailing comment\n"
      "t_max = 200.5\n"
      "seed = 42\n"
      "# full-line comment\n"
      "[observe]\n"
      "eps_list = -0.1, 0, 0.25\n");
  EXPECT_TRUE(cfg.has("run.name"));
  EXPECT_EQ(cfg.require_string("run.name"), "demo");
  EXPECT_DOUBLE_EQ(cfg.require_double("run.t_max"), 200.5);
  EXPECT_EQ(cfg.get_int("run.seed", 0), 42);
  EXPECT_DOUBLE_EQ(cfg.get_double("top", 0.0), 1.0);
  EXPECT_DOUBLE_EQ(cfg.get_double("run.missing", -7.0), -7.0);
  EXPECT_EQ(cfg.get_string("run.missing", "dflt"), "dflt");
  const auto lst = cfg.get_list("observe.eps_list");
  ASSERT_EQ(lst.size(), 3u);
  EXPECT_DOUBLE_EQ(lst[0], -0.1);
  EXPECT_DOUBLE_EQ(lst[1], 0.0);
  EXPECT_DOUBLE_EQ(lst[2], 0.25);
  EXPECT_TRUE(cfg.get_list("observe.absent").empty());
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_THROW(kpp::Config::parse("[run\nx = 1\n"), kpp::ConfigError);
  EXPECT_THROW(kpp::Config::parse("just a bare line\n"), kpp::ConfigError);
  EXPECT_THROW(kpp::Config::parse("= novalue\n"), kpp::ConfigError);
  const auto cfg = kpp::Config::parse("[a]\nx = 12abc\ny = 3,4\n");
  EXPECT_THROW(cfg.require_double("a.x"), kpp::ConfigError);
  EXPECT_THROW(cfg.get_int("a.y", 0), kpp::ConfigError);
  EXPECT_THROW(cfg.require_string("a.zzz"), kpp::ConfigError);
  try {
    kpp::Config::parse("ok = 1\nbroken line\n");
    FAIL() << "expected ConfigError";
  } catch (const kpp::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, CanonicalFormAndHashStability) {
  const auto a = kpp::Config::parse("[s]\nb = 2\na = 1\n");
  const auto b = kpp::Config::parse("# comment\n[s]\na   =   1\n\nb=2\n");
  EXPECT_EQ(a.canonical(), "s.a = 1\ns.b = 2\n");
  EXPECT_EQ(kpp::config_hash(a), kpp::config_hash(b));
  const auto c = kpp::Config::parse("[s]\na = 1\nb = 3\n");
  EXPECT_NE(kpp::config_hash(a), kpp::config_hash(c));
}

TEST(Fnv1a, KnownAnswers) {
  // Offset basis hashes the empty string; "a" folds in one byte.
  EXPECT_EQ(kpp::fnv1a(""), 14695981039346656037ULL);
  EXPECT_EQ(kpp::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Snapshot, RoundTripExact) {
  kpp::Snapshot s;
  s.t = 12.75;
  s.z_lo = -40.0;
  s.dz = 0.02;
  s.mu = 23.109375;
  for (int i = 0; i < 1000; ++i) s.w.push_back(std::exp(-0.01 * i) * 1.5);
  const auto path = temp_path("snap.kppw");
  kpp::save_snapshot(path, s);
  const auto r = kpp::load_snapshot(path);
  EXPECT_EQ(r.t, s.t);
  EXPECT_EQ(r.z_lo, s.z_lo);
  EXPECT_EQ(r.dz, s.dz);
  EXPECT_EQ(r.mu, s.mu);
  ASSERT_EQ(r.w.size(), s.w.size());
  for (std::size_t i = 0; i < s.w.size(); ++i) EXPECT_EQ(r.w[i], s.w[i]);
  std::remove(path.c_str());
}

TEST(Snapshot, RejectsCorruptStreams) {
  kpp::Snapshot s;
  s.w = {1.0, 2.0};
  std::ostringstream out;
  kpp::write_snapshot(out, s);
  std::string blob = out.str();

  {
    std::string bad = blob;
    bad[0] = 'X';
    std::istringstream in(bad);
    EXPECT_THROW(kpp::read_snapshot(in), std::runtime_error);
  }
  {
    std::string bad = blob;
    bad[4] = char(9);  // version field
    std::istringstream in(bad);
    EXPECT_THROW(kpp::read_snapshot(in), std::runtime_error);
  }
  {
    std::string bad = blob.substr(0, blob.size() - 5);
    std::istringstream in(bad);
    EXPECT_THROW(kpp::read_snapshot(in), std::runtime_error);
  }
  {
    std::istringstream in(blob);
    const auto r = kpp::read_snapshot(in);
    EXPECT_EQ(r.w.size(), 2u);
  }
}

TEST(CsvWriter, HeaderAndFullPrecisionRows) {
  const auto path = temp_path("table.csv");
  {
    kpp::CsvWriter csv(path, 0xdeadbeef12345678ULL, {"t", "mu"});
    csv.row({1.0, 2.0000000000000004});
    EXPECT_THROW(csv.row({1.0}), std::invalid_argument);
  }
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  EXPECT_EQ(l1, "# config_hash deadbeef12345678");
  EXPECT_EQ(l2, "# columns: t mu");
  EXPECT_EQ(l3, "1,2.0000000000000004");
  std::remove(path.c_str());
}

}  // namespace
