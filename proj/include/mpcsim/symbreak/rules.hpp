#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mpcsim/local/state.hpp"

namespace mpcsim {

enum class Mode : std::uint8_t { mis, mm };

// Status codes kept in the low two tag bits of every vertex state.
namespace status_code {
inline constexpr std::uint8_t active = 0;
inline constexpr std::uint8_t in_mis = 1;
inline constexpr std::uint8_t removed = 2;
inline constexpr std::uint8_t matched = 3;
}  // namespace status_code

// Edge flag shared by every matching rule; it survives between runs.
inline constexpr std::uint16_t kMatchedEdge = 1u << 12;

inline std::uint8_t status_of(Word s) { return vstate::tag(s) & 3u; }
inline bool is_active(Word s) { return status_of(s) == status_code::active; }
inline bool lower_end(Word e, Word s) { return estate::lo(e) == vstate::id(s); }

// 32-bit random value with the vertex ID as tie-break.
inline Word rank_key(std::uint32_t value, Vertex v) { return Word{value} << 24 | v; }

// Uniform choice among candidates: the smallest mixed key wins.
inline Word pick_key(std::uint32_t chunk, Vertex cand) { return (mix(chunk, cand) >> 24) << 24 | cand; }

// Luby's MIS, one iteration per five rounds:
// draw, compare on edges, local minima join, mark edges, neighbors leave.
struct LubyRule {
    static constexpr std::uint16_t alive = 1, lo_wins = 2, joined = 4;
    static constexpr std::uint64_t cycle = 5, quiet_phase = 0;

    // At a cycle end nothing changes again once no vertex is active.
    static bool busy(std::span<const Word> vs, std::span<const Word>) {
        return std::any_of(vs.begin(), vs.end(), [](Word s) { return is_active(s); });
    }

    Wide vertex(Word s, std::span<const Word> es, const TapeView& tape, std::uint64_t r) const {
        if (!is_active(s)) return s;
        const std::uint64_t ph = (r - 1) % cycle, k = (r - 1) / cycle;
        if (ph == 0) return vstate::with_payload(s, tape.chunk(k));
        if (ph == 2) {
            for (Word e : es)
                if ((estate::flags(e) & alive) && (((estate::flags(e) & lo_wins) != 0) != lower_end(e, s))) return s;
            return vstate::with_tag(s, status_code::in_mis);
        }
        if (ph == 4)
            for (Word e : es)
                if (estate::flags(e) & joined) return vstate::with_tag(s, status_code::removed);
        return s;
    }

    Wide edge(Word a, Word b, Word e, std::uint64_t r) const {
        const std::uint64_t ph = (r - 1) % cycle;
        if (ph == 1) {
            std::uint16_t f = 0;
            if (is_active(a) && is_active(b)) {
                f = alive;
                if (rank_key(vstate::payload(a), vstate::id(a)) < rank_key(vstate::payload(b), vstate::id(b))) f |= lo_wins;
            }
            return estate::with_flags(e, f);
        }
        if (ph == 3) {
            const bool j = status_of(a) == status_code::in_mis || status_of(b) == status_code::in_mis;
            return estate::with_flags(e, static_cast<std::uint16_t>((estate::flags(e) & alive) && j ? joined : 0));
        }
        return e;
    }
};

// Israeli-Itai matching, one iteration per five rounds: edges note which
// ends are active; active vertices flip a coin and senders pick a uniform
// alive edge; edges carry proposals; receivers accept the lowest-ID sender;
// edges record the match. Both ends read the match at the next cycle start.
struct IsraeliItaiRule {
    static constexpr std::uint16_t alive = 1, proposal = 2;
    static constexpr std::uint64_t cycle = 5, quiet_phase = 1;
    static constexpr std::uint32_t sender = 1u << 31, accepted = 1u << 30;

    // Right after edges refresh `alive`: no alive edge means no more matches.
    static bool busy(std::span<const Word>, std::span<const Word> es) {
        return std::any_of(es.begin(), es.end(), [](Word e) { return (estate::flags(e) & alive) != 0; });
    }

    Wide vertex(Word s, std::span<const Word> es, const TapeView& tape, std::uint64_t r) const {
        if (!is_active(s)) return s;
        const std::uint64_t ph = (r - 1) % cycle, k = (r - 1) / cycle;
        const Vertex v = vstate::id(s);
        if (ph == 0) {
            for (Word e : es)
                if (estate::flags(e) & kMatchedEdge) return vstate::make(v, status_code::matched, 0);
            return vstate::with_payload(s, 0);
        }
        if (ph == 1) {
            const std::uint32_t ch = tape.chunk(k);
            if ((ch & 1u) == 0) return s;
            Word best = ~Word{0};
            for (Word e : es)
                if (estate::flags(e) & alive) best = std::min(best, pick_key(ch, estate::other(e, v)));
            if (best == ~Word{0}) return s;
            return vstate::with_payload(s, sender | static_cast<std::uint32_t>(best & vstate::id_mask));
        }
        if (ph == 3 && !(vstate::payload(s) & sender)) {
            Word best = ~Word{0};
            for (Word e : es)
                if (estate::flags(e) & proposal) best = std::min<Word>(best, estate::other(e, v));
            if (best != ~Word{0}) return vstate::with_payload(s, accepted | static_cast<std::uint32_t>(best));
        }
        return s;
    }

    Wide edge(Word a, Word b, Word e, std::uint64_t r) const {
        const std::uint64_t ph = (r - 1) % cycle;
        const std::uint16_t f = estate::flags(e);
        const bool both = is_active(a) && is_active(b);
        switch (ph) {
            case 0: return estate::with_flags(e, (f & kMatchedEdge) | (both ? alive : 0));
            case 2:
                if (both && (proposes(a, b) || proposes(b, a))) return estate::with_flags(e, f | proposal);
                return e;
            case 4:
                if (both && (f & proposal) && (accepts(a, b) || accepts(b, a))) return estate::with_flags(e, f | kMatchedEdge);
                return e;
            default: return e;
        }
    }

  private:
    static bool proposes(Word from, Word to) {
        const std::uint32_t p = vstate::payload(from), q = vstate::payload(to);
        return (p & sender) && (p & vstate::id_mask) == vstate::id(to) && !(q & sender);
    }
    static bool accepts(Word recv, Word from) {
        const std::uint32_t q = vstate::payload(recv);
        return (q & accepted) && (q & vstate::id_mask) == vstate::id(from);
    }
};

enum class Fidelity : std::uint8_t { faithful, desk };

// Thresholds of the degree-reduction step. tau = max(alpha^a, (c log n)^b),
// beta = Delta^beta_exp, leaf_pick = max(1, floor(ceil(sqrt Delta) / 2)).
struct DegreeReductionParams {
    Mode mode = Mode::mis;
    Fidelity fidelity = Fidelity::desk;
    double tau_alpha_exp = 2;
    double tau_log_exp = 2;
    double tau_log_coeff = 2;
    double beta_exp = 0.25;
    std::optional<double> tau_override;

    static DegreeReductionParams faithful(Mode m) {
        return {.mode = m, .fidelity = Fidelity::faithful, .tau_alpha_exp = 16, .tau_log_exp = 14, .tau_log_coeff = 5,
                .beta_exp = 1.0 / 14, .tau_override = {}};
    }
    static DegreeReductionParams desk(Mode m) {
        DegreeReductionParams p;
        p.mode = m;
        return p;
    }

    // alpha_hat is a degeneracy-based estimate; faithful scales it by 5.
    [[nodiscard]] double tau(double alpha_hat, std::size_t n) const {
        if (tau_override) return *tau_override;
        const double lg = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
        const double a = fidelity == Fidelity::faithful ? 5 * alpha_hat : alpha_hat;
        return std::max(std::pow(a, tau_alpha_exp), std::pow(tau_log_coeff * lg, tau_log_exp));
    }
    [[nodiscard]] double beta(std::size_t delta) const { return std::pow(static_cast<double>(delta), beta_exp); }
};

inline std::size_t ceil_sqrt(std::size_t x) {
    auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(x)));
    while (r * r < x) ++r;
    while (r > 0 && (r - 1) * (r - 1) >= x) --r;
    return r;
}
inline std::size_t leaf_pick(std::size_t delta) { return std::max<std::size_t>(1, ceil_sqrt(delta) / 2); }

// One call of the degree-reduction step as twelve LOCAL rounds. Tag bits
// above the status record this call's marks; payloads carry the degree, the
// cut-off ID of kept edges, and the random value or proposal target.
struct DegreeReductionRule {
    static constexpr std::uint64_t cycle = 12;
    static constexpr std::uint8_t high = 4, exposed = 8, leaf = 16, good = 32;
    static constexpr std::uint16_t alive = 1, hi_lo = 2, hi_hi = 4, kept = 8, ex_lo = 16, ex_hi = 32, lf_lo = 64,
                                   lf_hi = 128, gd_lo = 256, gd_hi = 512, pick = 1024, joined = 2048;
    static constexpr std::uint32_t accepted = 1u << 31;

    Mode mode = Mode::mis;
    std::size_t h = 1;     // ceil(sqrt(Delta))
    std::size_t take = 1;  // leaf_pick
    double beta = 1;
    std::uint64_t first_call = 0;  // tape chunk of the first call

    DegreeReductionRule() = default;
    DegreeReductionRule(Mode m, std::size_t delta, const DegreeReductionParams& p, std::uint64_t call0 = 0)
        : mode(m), h(ceil_sqrt(delta)), take(leaf_pick(delta)), beta(p.beta(delta)), first_call(call0) {}

    Wide vertex(Word s, std::span<const Word> es, const TapeView& tape, std::uint64_t r) const {
        const std::uint64_t ph = (r - 1) % cycle, k = first_call + (r - 1) / cycle;
        const std::uint8_t st = status_of(s), tg = vstate::tag(s);
        const Vertex v = vstate::id(s);
        if (ph == 0) return vstate::make(v, st, 0);
        if (st != status_code::active) return s;
        auto other = [&](Word e, std::uint16_t lo_bit, std::uint16_t hi_bit) {
            return (estate::flags(e) & (lower_end(e, s) ? hi_bit : lo_bit)) != 0;
        };
        auto is_alive = [](Word e) { return (estate::flags(e) & alive) != 0; };
        switch (ph) {
            case 1: {
                std::uint32_t d = 0;
                for (Word e : es) d += is_alive(e);
                return vstate::make(v, static_cast<std::uint8_t>(tg | (d >= h ? high : 0)), d);
            }
            case 3: {
                if (!(tg & high)) return s;
                std::vector<Vertex> low;
                for (Word e : es)
                    if (is_alive(e) && !other(e, hi_lo, hi_hi)) low.push_back(estate::other(e, v));
                if (low.size() < take) return s;
                std::nth_element(low.begin(), low.begin() + static_cast<std::ptrdiff_t>(take - 1), low.end());
                return vstate::make(v, tg | exposed, low[take - 1]);
            }
            case 5: {
                if (tg & high) return s;
                for (Word e : es)
                    if (estate::flags(e) & kept) return vstate::with_tag(s, tg | leaf);
                return s;
            }
            case 7: {
                if (!(tg & leaf)) return s;
                std::size_t ex = 0, lv = 0;
                for (Word e : es) {
                    ex += (estate::flags(e) & kept) != 0;
                    lv += is_alive(e) && other(e, lf_lo, lf_hi);
                }
                if (!(static_cast<double>(ex) < beta && static_cast<double>(lv) < beta * beta)) return s;
                const std::uint32_t ch = tape.chunk(k);
                if (mode == Mode::mis) return vstate::make(v, tg | good, ch);
                Word best = ~Word{0};
                for (Word e : es)
                    if (estate::flags(e) & kept) best = std::min(best, pick_key(ch, estate::other(e, v)));
                return vstate::make(v, tg | good, static_cast<std::uint32_t>(best & vstate::id_mask));
            }
            case 9: {
                if (mode == Mode::mis) {
                    if (!(tg & good)) return s;
                    for (Word e : es)
                        if (is_alive(e) && other(e, gd_lo, gd_hi) && !(((estate::flags(e) & pick) != 0) == lower_end(e, s))) return s;
                    return vstate::make(v, status_code::in_mis | (tg & ~3u), vstate::payload(s));
                }
                if (!(tg & exposed)) return s;
                Word best = ~Word{0};
                for (Word e : es)
                    if (estate::flags(e) & pick) best = std::min<Word>(best, estate::other(e, v));
                if (best == ~Word{0}) return s;
                return vstate::make(v, tg, accepted | static_cast<std::uint32_t>(best));
            }
            case 11: {
                const std::uint16_t bit = mode == Mode::mis ? joined : kMatchedEdge;
                for (Word e : es)
                    if ((estate::flags(e) & bit) && is_alive(e))
                        return vstate::make(v, (tg & ~3u) | (mode == Mode::mis ? status_code::removed : status_code::matched),
                                            vstate::payload(s));
                return s;
            }
            default: return s;
        }
    }

    Wide edge(Word a, Word b, Word e, std::uint64_t r) const {
        const std::uint64_t ph = (r - 1) % cycle;
        const std::uint16_t f = estate::flags(e);
        const std::uint8_t ta = vstate::tag(a), tb = vstate::tag(b);
        auto put = [&](std::uint16_t g) { return estate::with_flags(e, g); };
        switch (ph) {
            case 0: return put((f & kMatchedEdge) | (is_active(a) && is_active(b) ? alive : 0));
            case 2: return put(f | (ta & high ? hi_lo : 0) | (tb & high ? hi_hi : 0));
            case 4: {
                std::uint16_t g = f | (ta & exposed ? ex_lo : 0) | (tb & exposed ? ex_hi : 0);
                if (f & alive) {
                    if ((ta & exposed) && !(tb & high) && vstate::id(b) <= vstate::payload(a)) g |= kept;
                    if ((tb & exposed) && !(ta & high) && vstate::id(a) <= vstate::payload(b)) g |= kept;
                }
                return put(g);
            }
            case 6: return put(f | (ta & leaf ? lf_lo : 0) | (tb & leaf ? lf_hi : 0));
            case 8: {
                std::uint16_t g = f | (ta & good ? gd_lo : 0) | (tb & good ? gd_hi : 0);
                if (mode == Mode::mis) {
                    if ((ta & good) && (tb & good) &&
                        rank_key(vstate::payload(a), vstate::id(a)) < rank_key(vstate::payload(b), vstate::id(b)))
                        g |= pick;
                } else if (f & kept) {
                    if (((ta & good) && vstate::payload(a) == vstate::id(b)) || ((tb & good) && vstate::payload(b) == vstate::id(a)))
                        g |= pick;
                }
                return put(g);
            }
            case 10: {
                if (!(f & alive)) return e;
                if (mode == Mode::mis) {
                    const bool j = status_of(a) == status_code::in_mis || status_of(b) == status_code::in_mis;
                    return put(f | (j ? joined : 0));
                }
                if (!(f & pick)) return e;
                const bool ok = ((ta & exposed) && vstate::payload(a) == (accepted | vstate::id(b))) ||
                                ((tb & exposed) && vstate::payload(b) == (accepted | vstate::id(a)));
                return put(f | (ok ? kMatchedEdge : 0));
            }
            default: return e;
        }
    }
};

}  // namespace mpcsim
