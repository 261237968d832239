// Acceptance gate for the simulator + analysis engine. Runs the seven
// release criteria and prints exactly one PASS/FAIL line per criterion;
// exits nonzero if any fail. argv[1] must name the CLI binary (used for the
// end-to-end preset runs).

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "antibunch/coincidence.hpp"
#include "antibunch/config.hpp"
#include "antibunch/detector.hpp"
#include "antibunch/optics.hpp"
#include "antibunch/source.hpp"
#include "antibunch/spacetime.hpp"
#include "antibunch/tag_file.hpp"
#include "oracles.hpp"

using namespace antibunch;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
std::vector<std::string> g_notes;  // failure details for the current criterion

void note(const std::string& msg) { g_notes.push_back(msg); }

bool expect(bool ok, const std::string& what) {
  if (!ok) note(what);
  return ok;
}

bool expect_near(double value, double target, double tol,
                 const std::string& what) {
  std::ostringstream os;
  os << what << ": got " << value << ", want " << target << " +- " << tol;
  return expect(std::abs(value - target) <= tol, os.str());
}

void report(int id, const char* name, bool ok) {
  if (ok) {
    std::printf("PASS: %d %s\n", id, name);
  } else {
    std::printf("FAIL: %d %s\n", id, name);
    for (const auto& n : g_notes) std::printf("      - %s\n", n.c_str());
  }
  g_notes.clear();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "antibunch_acceptance";
  fs::create_directories(dir);
  return dir;
}

bool run_cli(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null";
  const int rc = std::system(cmd.c_str());
  return rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
}

struct CsvRow {
  double value = 0.0;
  double sigma = 0.0;
  std::string text;
};

std::map<std::string, CsvRow> parse_report(const fs::path& path) {
  std::map<std::string, CsvRow> rows;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    if (c1 == std::string::npos) continue;
    const auto c2 = line.find(',', c1 + 1);
    CsvRow row;
    row.text = line.substr(c1 + 1, c2 - c1 - 1);
    char* end = nullptr;
    row.value = std::strtod(row.text.c_str(), &end);
    if (c2 != std::string::npos) {
      const std::string s = line.substr(c2 + 1);
      row.sigma = std::strtod(s.c_str(), nullptr);
    }
    rows[line.substr(0, c1)] = row;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// 1. Estimator arithmetic on the reference experiment's raw counts.
// ---------------------------------------------------------------------------
bool criterion_estimators() {
  const auto fc = CountWithError::from_count;

  const auto p_a = conditional_probability(fc(94'800), fc(5'570'000));
  const auto p_b = conditional_probability(fc(63'800), fc(5'860'000));
  const auto p_11 = conditional_probability(fc(4), fc(17'145'000));
  const auto p_n = conditional_probability(fc(50), fc(5'500'000));
  const auto p_a_tl = conditional_probability(fc(99'000), fc(6'130'000));
  const auto p_b_tl = conditional_probability(fc(62'200), fc(6'100'000));

  const auto product_sl = independence_product(p_a, p_b);
  const auto product_tl = independence_product(p_a_tl, p_b_tl);
  const auto accidental = accidental_prediction(p_n, p_a, p_b);

  bool ok = true;
  ok &= expect_near(p_a.value, 1.703e-2, 0.002e-2, "spacelike P_A");
  ok &= expect_near(p_b.value, 1.090e-2, 0.002e-2, "spacelike P_B");
  ok &= expect_near(p_11.value, 2.3e-7, 0.1e-7, "spacelike P(1,1)");
  ok &= expect(p_11.sigma >= 1.0e-7 && p_11.sigma <= 1.4e-7,
               "spacelike P(1,1) sigma ~ 1.2e-7");
  ok &= expect_near(p_a_tl.value, 1.616e-2, 0.002e-2, "timelike P_A");
  ok &= expect_near(p_b_tl.value, 1.019e-2, 0.002e-2, "timelike P_B");
  ok &= expect_near(product_sl.value, 1.86e-4, 0.01e-4,
                    "spacelike P_A*P_B product");
  ok &= expect_near(product_tl.value, 1.65e-4, 0.01e-4,
                    "timelike P_A*P_B product");
  ok &= expect_near(accidental.value, 2.5e-7, 0.1e-7,
                    "predicted accidental P(1,1)");
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Streaming counters == brute force on >= 1000 random streams.
// ---------------------------------------------------------------------------
bool criterion_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20'240'817);
  bool ok = true;
  int streams = 0;

  auto check_stream = [&](const std::vector<TimeTag>& tags) {
    ++streams;
    std::uniform_int_distribution<std::int64_t> center(-300, 300);
    std::uniform_int_distribution<std::int64_t> width(50, 600);
    const WindowSpec wa{center(rng), width(rng)};
    const WindowSpec wb{center(rng), width(rng)};

    SpanTagSource s1(tags);
    const auto hist = build_delay_histogram(s1, 0, 1, 25, -500, 500);
    ok &= expect(hist.counts == oracle::histogram(tags, 0, 1, 25, -500, 500),
                 "histogram mismatch at stream " + std::to_string(streams));

    SpanTagSource s2(tags);
    const auto d = count_double(s2, 0, 1, wa);
    ok &= expect(d.coincidences == oracle::doubles(tags, 0, 1, wa),
                 "doubles mismatch at stream " + std::to_string(streams));
    ok &= expect(d.heralds == oracle::channel_count(tags, 0),
                 "herald count mismatch at stream " + std::to_string(streams));

    SpanTagSource s3(tags);
    const auto t = count_triple(s3, 0, 1, wa, 2, wb);
    ok &= expect(t.coincidences == oracle::triples(tags, 0, 1, wa, 2, wb),
                 "triples mismatch at stream " + std::to_string(streams));
  };

  for (int i = 0; i < 940; ++i) {
    check_stream(oracle::random_stream(rng, 20 + rng() % 380, 3,
                                       2'000 + rng() % 20'000));
  }
  for (int i = 0; i < 50; ++i) {
    check_stream(oracle::random_stream(rng, 2'000, 3, 200'000));
  }
  for (int i = 0; i < 10; ++i) {
    check_stream(oracle::random_stream(rng, 10'000, 3, 1'000'000));
  }

  ok &= expect(streams >= 1000, "at least 1000 streams exercised");
  const double dt = seconds_since(t0);
  ok &= expect(dt < 60.0,
               "oracle sweep finished in " + std::to_string(dt) + " s");
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Spacelike preset end-to-end at desk scale (60 s simulated).
// ---------------------------------------------------------------------------
bool criterion_spacelike_run() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = work_dir() / "sl";
  fs::remove_all(dir);
  if (!expect(run_cli("report --preset spacelike-paper --out \"" +
                      dir.string() + "\""),
              "CLI report run succeeded")) {
    return false;
  }
  const auto rows = parse_report(dir / "report.csv");
  bool ok = true;

  const double heralds = rows.at("R_H(A)").value;
  ok &= expect_near(heralds, 557'000.0, 5.0 * std::sqrt(557'000.0),
                    "herald count (5 sigma)");

  const auto& pa = rows.at("P_A");
  ok &= expect_near(pa.value, 1.703e-2, 3.0 * pa.sigma, "P_A (3 sigma)");
  const auto& pb = rows.at("P_B");
  ok &= expect_near(pb.value, 1.090e-2, 3.0 * pb.sigma, "P_B (3 sigma)");
  const auto& pn = rows.at("P_N");
  ok &= expect_near(pn.value, 9.0e-6, 3.0 * pn.sigma, "P_N (3 sigma)");

  const double ratio = rows.at("antibunching_ratio").value;
  ok &= expect(ratio < 1e-2, "antibunching ratio " + std::to_string(ratio) +
                                 " < 1e-2");
  ok &= expect(rows.at("separation").text == "SL", "separation certified SL");

  const double dt = seconds_since(t0);
  ok &= expect(dt < 120.0,
               "end-to-end run finished in " + std::to_string(dt) + " s");
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Timelike preset: same statistics, timelike certificate.
// ---------------------------------------------------------------------------
bool criterion_timelike_run() {
  const fs::path dir = work_dir() / "tl";
  fs::remove_all(dir);
  if (!expect(run_cli("report --preset timelike-paper --out \"" +
                      dir.string() + "\""),
              "CLI report run succeeded")) {
    return false;
  }
  const auto rows = parse_report(dir / "report.csv");
  bool ok = true;
  const auto& pa = rows.at("P_A");
  ok &= expect_near(pa.value, 1.616e-2, 3.0 * pa.sigma, "P_A (3 sigma)");
  const auto& pb = rows.at("P_B");
  ok &= expect_near(pb.value, 1.019e-2, 3.0 * pb.sigma, "P_B (3 sigma)");
  ok &= expect(rows.at("separation").text == "TL", "separation certified TL");
  ok &= expect(rows.at("separation_undetermined").text == "0",
               "certificate is determined");
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Geometry: light travel time, fiber delay, both certificates.
// ---------------------------------------------------------------------------
bool criterion_geometry() {
  bool ok = true;

  GeometryConfig sl;
  sl.det_b_pos_mm = {10'000, 0, 0};
  sl.fiber_a_mm = 10'000;
  sl.fiber_b_mm = 10'000;
  const auto cert_sl = certify_separation(sl);
  ok &= expect(cert_sl.cls == IntervalClass::Spacelike,
               "equal-delay 10 m geometry certifies Spacelike");
  ok &= expect_near(static_cast<double>(cert_sl.light_travel_time_ps),
                    33'356.0, 1.0, "light travel time over 10 m");

  ok &= expect(fiber_delay_ps(10'000, 1.5) == 50'034,
               "10 m of n=1.5 fiber delays 50034 ps");

  GeometryConfig tl = sl;
  tl.fiber_a_mm = 0;
  tl.fiber_b_mm = 20'000;
  ok &= expect(certify_separation(tl).cls == IntervalClass::Timelike,
               "100 ns-offset geometry certifies Timelike");
  return ok;
}

// ---------------------------------------------------------------------------
// 6. Statistical properties of the physics blocks.
// ---------------------------------------------------------------------------
bool criterion_statistics() {
  bool ok = true;

  // Beamsplitter conservation: exact for every seed.
  for (std::uint64_t seed = 0; seed < 300 && ok; ++seed) {
    std::vector<std::int64_t> in;
    for (const auto& p : generate_pairs({30'000.0, 0.02, seed})) {
      in.push_back(p.t_ps);
    }
    const auto [a, b] = beamsplit(in, {0.37, seed ^ 0x9e37});
    std::vector<std::int64_t> merged;
    std::merge(a.begin(), a.end(), b.begin(), b.end(),
               std::back_inserter(merged));
    ok &= expect(merged == in,
                 "beamsplit partition exact at seed " + std::to_string(seed));
  }

  // Source counts: Poisson mean and variance over seeds, 3 sigma.
  {
    const int runs = 150;
    const double lambda = 1'000.0;  // 10 kHz for 0.1 s
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < runs; ++s) {
      const double n = static_cast<double>(
          generate_pairs({10'000.0, 0.1, 50'000 + static_cast<std::uint64_t>(s)})
              .size());
      sum += n;
      sum_sq += n * n;
    }
    const double mean = sum / runs;
    const double var = (sum_sq - runs * mean * mean) / (runs - 1);
    ok &= expect_near(mean, lambda, 3.0 * std::sqrt(lambda / runs),
                      "source count mean (3 sigma)");
    ok &= expect_near(var / mean, 1.0, 3.0 * std::sqrt(2.0 / (runs - 1)),
                      "source count Fano factor (3 sigma)");
  }

  // Dark counts: same Poisson checks through the detector model.
  {
    const int runs = 150;
    const double lambda = 9'100.0 * 0.05;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < runs; ++s) {
      const double n = static_cast<double>(
          detect({}, {1.0, 0.0, 9'100.0, 0, 90'000 + static_cast<std::uint64_t>(s)},
                 0.05)
              .clicks.size());
      sum += n;
      sum_sq += n * n;
    }
    const double mean = sum / runs;
    const double var = (sum_sq - runs * mean * mean) / (runs - 1);
    ok &= expect_near(mean, lambda, 3.0 * std::sqrt(lambda / runs),
                      "dark count mean (3 sigma)");
    ok &= expect_near(var / mean, 1.0, 3.0 * std::sqrt(2.0 / (runs - 1)),
                      "dark count Fano factor (3 sigma)");
  }

  // Two pairs in one window: probability ~ p^2/2 for small p = rate*window.
  {
    const double rate = 200'000.0, duration = 10.0;
    const std::int64_t window_ps = 100'000;  // 100 ns -> p = 0.02
    const double p = rate * 1e-12 * static_cast<double>(window_ps);
    const auto pairs = generate_pairs({rate, duration, 424'242});
    const double n_windows = duration * 1e12 / static_cast<double>(window_ps);

    std::uint64_t multi = 0;
    std::size_t i = 0;
    while (i < pairs.size()) {
      const std::int64_t bucket = pairs[i].t_ps / window_ps;
      std::size_t j = i + 1;
      while (j < pairs.size() && pairs[j].t_ps / window_ps == bucket) ++j;
      if (j - i >= 2) ++multi;
      i = j;
    }
    const double expected = n_windows * p * p / 2.0;
    ok &= expect_near(static_cast<double>(multi), expected,
                      5.0 * std::sqrt(expected),
                      "two-pair window count ~ N p^2/2 (5 sigma)");
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 7. File format and analysis throughput.
// ---------------------------------------------------------------------------
bool criterion_format() {
  bool ok = true;
  const fs::path dir = work_dir();

  // Documented 23-byte single-tag file.
  {
    const fs::path p = dir / "single.ptag";
    const TimeTag tag{50, 1};
    write_tags(p, TagFileHeader{50, 3}, std::span(&tag, 1));
    std::ifstream in(p, std::ios::binary);
    const std::vector<unsigned char> bytes(std::istreambuf_iterator<char>(in),
                                           {});
    const std::vector<unsigned char> expected{
        'P', 'T', 'A', 'G', 0x01, 0x00, 0x00, 0x00,
        50, 0x00, 0x00, 0x00, 3, 0x00,
        50, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 1};
    ok &= expect(bytes == expected, "single-tag file is the 23-byte golden");
  }

  // Round-trip identity on a random stream.
  {
    std::mt19937_64 rng(404);
    const auto tags = oracle::random_stream(rng, 100'000, 3, 1'000'000'000);
    const fs::path p = dir / "round.ptag";
    write_tags(p, TagFileHeader{50, 3}, tags);
    const auto [header, back] = read_tags(p);
    bool same = header.resolution_ps == 50 && back.size() == tags.size();
    for (std::size_t i = 0; same && i < back.size(); ++i) {
      same = back[i].t_ps == tags[i].t_ps && back[i].channel == tags[i].channel;
    }
    ok &= expect(same, "PTAG round trip is the identity");
  }

  // Throughput: analyze a 1e7-tag file at >= 1e6 tags/s with bounded memory.
  {
    const fs::path p = dir / "big.ptag";
    {
      TagFileWriter writer(p, TagFileHeader{50, 3});
      std::uint64_t t = 0;
      std::uint64_t x = 0x2545F4914F6CDD1Dull;
      for (std::uint64_t i = 0; i < 10'000'000; ++i) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        t += 1 + (x % 9'000);
        writer.append({t, static_cast<std::uint8_t>(x % 3)});
      }
      writer.close();
    }

    AnalysisConfig cfg;
    cfg.window_a = {0, 1000};
    cfg.window_b = {0, 1000};
    const auto t0 = std::chrono::steady_clock::now();
    TagFileReader reader(p);
    const auto stream = analyze_stream(reader, cfg);
    const double dt = seconds_since(t0);

    ok &= expect(stream.tags_read == 10'000'000, "all tags analyzed");
    const double rate = 1e7 / dt;
    ok &= expect(rate >= 1e6, "analysis throughput " +
                                  std::to_string(static_cast<long>(rate)) +
                                  " tags/s >= 1e6");
    ok &= expect(stream.peak_buffered < 10'000,
                 "analysis buffers bounded (peak " +
                     std::to_string(stream.peak_buffered) + " tags)");
    ok &= expect(reader.buffer_capacity_bytes() ==
                     TagFileReader::kBufferRecords * kTagRecordSize,
                 "reader memory fixed regardless of file size");
    fs::remove(p);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <cli-binary>\n");
    return 2;
  }
  g_cli = argv[1];

  struct Criterion {
    int id;
    const char* name;
    bool (*fn)();
  };
  const Criterion criteria[] = {
      {1, "estimator arithmetic reproduces the reference table", criterion_estimators},
      {2, "streaming counters match brute-force oracles on 1000 streams", criterion_oracles},
      {3, "spacelike preset reproduces the reference statistics end to end", criterion_spacelike_run},
      {4, "timelike preset agrees statistically and certifies Timelike", criterion_timelike_run},
      {5, "geometry: light travel times, fiber delays, certificates", criterion_geometry},
      {6, "statistical properties: conservation, Poisson counts, p^2/2", criterion_statistics},
      {7, "tag file format and analysis throughput", criterion_format},
  };

  bool all_ok = true;
  for (const auto& c : criteria) {
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      note(std::string("exception: ") + e.what());
      ok = false;
    }
    report(c.id, c.name, ok);
    all_ok &= ok;
  }
  return all_ok ? 0 : 1;
}
