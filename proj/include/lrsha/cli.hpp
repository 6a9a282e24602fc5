#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrsha/kernels.hpp"
#include "lrsha/keyfile.hpp"
#include "lrsha/vclient.hpp"

// Operator commands behind the `lrsha` tool. Each is a plain function so the
// tool's main only parses flags and maps errors to exit codes.
namespace lrsha::cli {

// ---- ceremony ----

struct CeremonyOptions {
  Scheme scheme = Scheme::lrsha;
  GroupId group = GroupId::ristretto255;
  std::uint32_t servers = 3;
  std::uint64_t max_epoch = kDefaultMaxSignatures;
  std::filesystem::path out;
  std::vector<std::string> addresses;     // default 127.0.0.1:7001..
  std::optional<std::uint64_t> seed;      // reproducible keys, for demos only
  std::optional<std::string> seal_key;    // hex; see comc::resolve_seal_key
};

struct CeremonyFiles {
  std::filesystem::path signer_key;
  std::vector<std::filesystem::path> server_secrets;
  std::filesystem::path descriptor;
};

inline constexpr const char* kSignerKeyName = "signer.key";
inline constexpr const char* kDescriptorName = "descriptor.json";
std::string server_secret_name(std::uint16_t index);

// Errors: dir_not_empty, invalid_params.
CeremonyFiles ceremony(const CeremonyOptions& opts);

// ---- signing ----

struct SignOptions {
  std::filesystem::path key;
  std::optional<std::string> seal_key;
  std::optional<std::filesystem::path> precomputed;
};

struct SignResult {
  Signature signature;
  bool used_precomputed = false;
  bool replenish = false;  // the store fell below its watermark
};

// Signs and persists the advanced key before returning, so a signature is
// never handed out for an epoch that the key file could reuse.
// Errors: state_exhausted, corrupt_key_file, io_error.
SignResult sign_message(const SignOptions& opts, ByteView message);

struct PrecomputeOptions {
  std::filesystem::path key;
  std::optional<std::string> seal_key;
  std::filesystem::path out;
  std::uint64_t count = 2048;
  std::optional<std::uint64_t> watermark;  // default count / 8
  kernels::Exec exec = kernels::Exec::parallel;
};

struct PrecomputeStats {
  std::uint64_t first = 0;
  std::uint64_t entries = 0;
  std::size_t entry_bytes = 0;
  std::size_t store_bytes = 0;
};

// Errors: count_exceeds_remaining, corrupt_key_file.
PrecomputeStats precompute_store(const PrecomputeOptions& opts);

// ---- verification ----

enum class Outcome { accept = 0, reject = 1, error = 2 };

struct VerifyOutcome {
  Outcome outcome = Outcome::error;
  std::string reason;  // empty on accept
  std::uint64_t epoch = 0;
};

// Infrastructure failures (ServerUnreachable, unreadable input) map to
// Outcome::error; everything the verifier decides maps to accept/reject.
VerifyOutcome verify_signature(vclient::Client& client, ByteView message, ByteView signature);

// "accept" | "reject <reason>" | "error <reason>", or a one-line JSON object.
std::string format_outcome(const VerifyOutcome& v, bool json);

std::string format_audit(const vclient::AuditReport& r, bool json);

// ---- demo ----

struct DemoOptions {
  Scheme scheme = Scheme::lrsha;
  std::uint32_t servers = 3;
  std::uint64_t max_epoch = 32;
  std::uint64_t messages = 0;  // default: every epoch
  std::optional<std::uint64_t> seed;
  std::uint16_t tamper_server = 2;
  std::string fault = "flip:20";
  std::filesystem::path server_bin;  // comc-server executable
  std::optional<std::filesystem::path> workdir;
};

// Runs the whole deployment with real server processes and writes a
// transcript. Returns 0 when every stage passes; otherwise the transcript's
// last line names the failing stage.
int run_demo(const DemoOptions& opts, std::ostream& transcript);

// ---- bench ----

struct BenchOptions {
  std::uint64_t iterations = 1000;
  std::uint32_t servers = 3;
  GroupId group = GroupId::ristretto255;
  std::vector<Scheme> schemes{Scheme::lrsha, Scheme::flrsha};
};

struct BenchRow {
  std::string name;
  double median_us = 0;
  double p10_us = 0;
  double p90_us = 0;
  std::uint64_t iterations = 0;
  std::uint64_t exp_per_op = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::pair<std::string, std::uint64_t>> sizes;  // measured encodings, bytes
  std::vector<std::pair<std::string, double>> ratios;        // baseline median / scheme median
  std::vector<std::pair<std::string, std::string>> environment;

  const BenchRow* row(std::string_view name) const;
  std::string to_json() const;
  std::string to_markdown() const;
};

BenchReport run_bench(const BenchOptions& opts);

}  // namespace lrsha::cli
