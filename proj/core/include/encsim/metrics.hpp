#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "encsim/config.hpp"
#include "encsim/engine.hpp"
#include "encsim/victim.hpp"

namespace encsim {

enum class AttackVectorId {
    L1PrimeProbe,
    L2PrimeProbe,
    L3PrimeProbe,
    PageFault,
    BSpm,
    TSpm,
    HtSpm,
    CrossEnclaveDrama,
    CacheDram,
};

const char* vector_label(AttackVectorId v);

// Smallest memory unit one observation pins down. Cache Prime+Probe sees
// PRM/sets bytes per set; page-flag and fault vectors see pages; DRAMA sees
// one page's share of a row; cache-DRAM sees a line.
std::uint64_t spatial_accuracy_bytes(AttackVectorId v, const SimConfig& cfg);

std::string human_bytes(std::uint64_t bytes);

struct GranularityRow {
    std::string vector;
    std::uint64_t bytes;
    std::string label;
};
std::vector<GranularityRow> granularity_table(const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Signature partitions over dictionary layouts.

enum class ChannelModel : std::uint8_t { PageFaultSequence, BspmPageSets };

struct SignaturePartition {
    // signature -> word indices sharing it
    std::map<std::string, std::vector<std::size_t>> groups;
    std::map<std::size_t, std::size_t> size_histogram() const;
    std::size_t unique_count() const;  // words in singleton groups
};

SignaturePartition signature_partition(const DictionaryLayout& dict, ChannelModel channel);

// True when every group of `fine` lies inside one group of `coarse`.
bool refines(const SignaturePartition& fine, const SignaturePartition& coarse);

// ---------------------------------------------------------------------------
// Recovery scoring.

struct AttackReport {
    std::string scenario;
    std::string attack;
    std::string recovered_secret;
    std::string true_secret;
    double bit_error_rate = 0.0;
    double coverage = 0.0;
    double precision = 0.0;
    std::uint64_t aex_count = 0;
    std::uint64_t baseline_aex_count = 0;
    double slowdown = 1.0;
    std::uint64_t spatial_granularity_bytes = 0;
    std::string aex_band;
    std::string slowdown_band;
};

// Hamming distance over equal-length strings; throws on length mismatch.
double bit_error_rate(const std::string& recovered, const std::string& truth);

struct BinaryScore {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double coverage() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0; }
    double precision() const { return tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0; }
    void add(bool predicted, bool truth) {
        if (predicted && truth) ++tp;
        else if (predicted && !truth) ++fp;
        else if (!predicted && truth) ++fn;
        else ++tn;
    }
};

// Qualitative bands for the summary table. Documented edges: AEX "none" is
// exactly zero, "high" from 50k; slowdown "minimal" under 1.05x, "high"
// from 2x.
std::string aex_band(std::uint64_t aex);
std::string slowdown_band(double slowdown);

void fill_side_effects(AttackReport& r, const SimResult& sim);

}  // namespace encsim
