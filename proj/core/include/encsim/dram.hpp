#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "encsim/config.hpp"
#include "encsim/rng.hpp"
#include "encsim/types.hpp"

namespace encsim {

struct DramAddr {
    std::uint32_t channel;
    std::uint32_t dimm;
    std::uint32_t rank;
    std::uint32_t bank;
    std::uint64_t row;

    bool same_bank(const DramAddr& o) const {
        return channel == o.channel && dimm == o.dimm && rank == o.rank && bank == o.bank;
    }
    bool same_cell(const DramAddr& o) const { return same_bank(o) && row == o.row; }
};

DramAddr dram_map(const DramConfig& cfg, PhysAddr pa);

// Row span of a physically contiguous region: (base >> row_shift,
// (base + size - 1) >> row_shift). With a row-aligned PRM these rows are
// exclusively enclave-owned.
std::pair<std::uint64_t, std::uint64_t> prm_row_range(PhysAddr prm_base, std::uint64_t prm_size,
                                                      unsigned row_shift = 19);

struct DramResult {
    bool row_hit;
    Cycle latency;
};

// One open row per bank; an access to a different row in the bank is a
// row conflict and replaces the open row.
class DramState {
public:
    explicit DramState(const DramConfig& cfg);

    DramResult access(PhysAddr pa, SeededRng& rng, double sigma);

    std::optional<std::uint64_t> open_row(const DramAddr& bank) const;
    void close_all();

private:
    std::size_t bank_index(const DramAddr& a) const;

    DramConfig cfg_;
    std::vector<std::int64_t> open_rows_;  // -1 = closed
};

struct RowPair {
    PhysAddr same_row;       // p: shares (channel,rank,bank,row) with the target
    PhysAddr conflict_row;   // p': same bank, different row
};

// Searches the attacker-owned physical pages for the DRAMA probe pair.
// `target` is the victim address d. p must differ from d's 64B chunk.
std::optional<RowPair> find_row_pair(const DramConfig& cfg, PhysAddr target,
                                     const std::vector<std::uint64_t>& attacker_ppns);

}  // namespace encsim
