#include "encsim/dram.hpp"

#include <bit>

namespace encsim {

DramAddr dram_map(const DramConfig& cfg, PhysAddr pa) {
    const std::uint64_t capacity = std::uint64_t{cfg.channels} * cfg.dimms * cfg.ranks *
                                   cfg.banks * cfg.rows * cfg.row_bytes;
    if (pa >= capacity) throw SimError("physical address outside modeled DRAM range");
    DramAddr out{};
    out.row = pa >> cfg.row_shift;
    std::uint64_t bank = pa >> cfg.bank_lo;
    if (cfg.bank_xor_row) bank ^= out.row;
    out.bank = static_cast<std::uint32_t>(bank & (cfg.banks - 1));
    out.channel = cfg.channels > 1
                      ? static_cast<std::uint32_t>((pa >> cfg.channel_bit) & (cfg.channels - 1))
                      : 0;
    out.rank = cfg.ranks > 1 ? static_cast<std::uint32_t>((pa >> cfg.rank_bit) & (cfg.ranks - 1))
                             : 0;
    out.dimm = 0;
    return out;
}

std::pair<std::uint64_t, std::uint64_t> prm_row_range(PhysAddr prm_base, std::uint64_t prm_size,
                                                      unsigned row_shift) {
    return {prm_base >> row_shift, (prm_base + prm_size - 1) >> row_shift};
}

DramState::DramState(const DramConfig& cfg) : cfg_(cfg) {
    open_rows_.assign(std::size_t{cfg.channels} * cfg.dimms * cfg.ranks * cfg.banks, -1);
}

std::size_t DramState::bank_index(const DramAddr& a) const {
    return ((a.channel * cfg_.dimms + a.dimm) * cfg_.ranks + a.rank) * cfg_.banks + a.bank;
}

DramResult DramState::access(PhysAddr pa, SeededRng& rng, double sigma) {
    const DramAddr a = dram_map(cfg_, pa);
    std::int64_t& open = open_rows_[bank_index(a)];
    const bool hit = open == static_cast<std::int64_t>(a.row);
    open = static_cast<std::int64_t>(a.row);
    Cycle base = hit ? cfg_.latency_hit : cfg_.latency_conflict;
    if (sigma > 0.0) {
        const std::int64_t jitter = rng.gaussian_int(sigma);
        if (jitter < 0 && static_cast<Cycle>(-jitter) >= base)
            base = 1;
        else
            base = static_cast<Cycle>(static_cast<std::int64_t>(base) + jitter);
    }
    return DramResult{hit, base};
}

std::optional<std::uint64_t> DramState::open_row(const DramAddr& bank) const {
    const std::int64_t v = open_rows_[bank_index(bank)];
    if (v < 0) return std::nullopt;
    return static_cast<std::uint64_t>(v);
}

void DramState::close_all() { open_rows_.assign(open_rows_.size(), -1); }

std::optional<RowPair> find_row_pair(const DramConfig& cfg, PhysAddr target,
                                     const std::vector<std::uint64_t>& attacker_ppns) {
    const DramAddr want = dram_map(cfg, target);
    const std::uint64_t target_line = target >> kLineShift;
    std::optional<PhysAddr> p, p_prime;
    for (std::uint64_t ppn : attacker_ppns) {
        for (std::uint64_t off = 0; off < kPageSize; off += kLineSize) {
            const PhysAddr pa = (ppn << kPageShift) | off;
            const DramAddr got = dram_map(cfg, pa);
            if (!p && got.same_cell(want) && (pa >> kLineShift) != target_line) p = pa;
            if (!p_prime && got.same_bank(want) && got.row != want.row) p_prime = pa;
            if (p && p_prime) return RowPair{*p, *p_prime};
        }
    }
    return std::nullopt;
}

}  // namespace encsim
