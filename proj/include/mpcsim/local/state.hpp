#pragma once

#include <concepts>
#include <span>
#include <vector>

#include "mpcsim/core/random.hpp"
#include "mpcsim/graph/graph.hpp"
#include "mpcsim/runtime/config.hpp"

namespace mpcsim {

// Vertex state word: payload:32 | tag:8 | id:24. Edge state word:
// flags:16 | hi:24 | lo:24. The identifier bits never change, so the initial
// states are exactly the IDs and the endpoint pairs.
namespace vstate {
inline constexpr Word id_mask = (Word{1} << 24) - 1;
constexpr Word make(Vertex id, std::uint8_t tag, std::uint32_t payload) {
    return Word{payload} << 32 | Word{tag} << 24 | (Word{id} & id_mask);
}
constexpr Vertex id(Word s) { return static_cast<Vertex>(s & id_mask); }
constexpr std::uint8_t tag(Word s) { return static_cast<std::uint8_t>(s >> 24); }
constexpr std::uint32_t payload(Word s) { return static_cast<std::uint32_t>(s >> 32); }
constexpr Word with_tag(Word s, std::uint8_t t) { return make(id(s), t, payload(s)); }
constexpr Word with_payload(Word s, std::uint32_t p) { return make(id(s), tag(s), p); }
}  // namespace vstate

namespace estate {
inline constexpr Word ids_mask = (Word{1} << 48) - 1;
constexpr Word make(Vertex lo, Vertex hi, std::uint16_t flags) {
    return Word{flags} << 48 | (Word{hi} & vstate::id_mask) << 24 | (Word{lo} & vstate::id_mask);
}
constexpr Vertex lo(Word s) { return static_cast<Vertex>(s & vstate::id_mask); }
constexpr Vertex hi(Word s) { return static_cast<Vertex>((s >> 24) & vstate::id_mask); }
constexpr std::uint16_t flags(Word s) { return static_cast<std::uint16_t>(s >> 48); }
constexpr Word with_flags(Word s, std::uint16_t f) { return (s & ids_mask) | Word{f} << 48; }
constexpr Vertex other(Word s, Vertex x) { return lo(s) == x ? hi(s) : lo(s); }
}  // namespace estate

inline constexpr std::size_t kMaxVertices = std::size_t{1} << 24;

struct StateVector {
    std::uint64_t round = 0;
    std::vector<Word> vertex;  // by vertex ID
    std::vector<Word> edge;    // by canonical edge index

    static StateVector initial(const Graph& g) {
        if (g.n() > kMaxVertices) throw ArgumentError("state words hold vertex IDs below 2^24");
        StateVector s;
        s.vertex.resize(g.n());
        for (Vertex v = 0; v < g.n(); ++v) s.vertex[v] = v;
        s.edge.resize(g.m());
        for (std::size_t i = 0; i < g.m(); ++i) s.edge[i] = estate::make(g.edge(i).u, g.edge(i).v, 0);
        return s;
    }

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

// Per-vertex random tape of c_tape * ceil(log2 n)^2 bits, read in 32-bit
// chunks derived from (seed, vertex, index). Every copy of a vertex sees the
// same tape.
class RandomTape {
  public:
    RandomTape(std::uint64_t seed, std::size_t n, std::size_t c_tape = 16) : seed_(seed) {
        const std::size_t lg = std::max<std::size_t>(1, ceil_log2(n));
        chunks_ = std::max<std::size_t>(1, c_tape * lg * lg / 32);
    }

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::size_t chunks() const { return chunks_; }
    [[nodiscard]] std::size_t bits() const { return 32 * chunks_; }

    [[nodiscard]] std::uint32_t chunk(Vertex v, std::size_t k) const {
        if (k >= chunks_)
            throw ArgumentError("tape of vertex " + std::to_string(v) + " read at chunk " + std::to_string(k) +
                                " past its " + std::to_string(chunks_) + " chunks");
        return static_cast<std::uint32_t>(mix(seed_, v, k));
    }

  private:
    std::uint64_t seed_;
    std::size_t chunks_;
};

class TapeView {
  public:
    TapeView(const RandomTape& t, Vertex v) : t_(&t), v_(v) {}
    [[nodiscard]] std::uint32_t chunk(std::size_t k) const { return t_->chunk(v_, k); }
    [[nodiscard]] Vertex vertex() const { return v_; }

  private:
    const RandomTape* t_;
    Vertex v_;
};

using Wide = unsigned __int128;

// A state-congested LOCAL rule. `vertex` sees its own state, the states of
// its incident edges in neighbor order, its tape and the round being
// computed; `edge` sees both endpoint states (lower ID first) and its own.
// Results are returned wide so that an oversized state can be detected.
template <class R>
concept LocalRule = requires(const R& r, Word s, std::span<const Word> es, const TapeView& tape, std::uint64_t round) {
    { r.vertex(s, es, tape, round) } -> std::convertible_to<Wide>;
    { r.edge(s, s, s, round) } -> std::convertible_to<Wide>;
};

namespace detail {
inline Word narrow_vertex(Wide w, Vertex v) {
    if ((w >> 64) != 0) throw RuleViolation("state of vertex " + std::to_string(v) + " exceeds one word");
    const Word s = static_cast<Word>(w);
    if (vstate::id(s) != v) throw RuleViolation("rule rewrote the identifier bits of vertex " + std::to_string(v));
    return s;
}
inline Word narrow_edge(Wide w, Word before) {
    if ((w >> 64) != 0)
        throw RuleViolation("state of edge " + std::to_string(estate::lo(before)) + "-" +
                            std::to_string(estate::hi(before)) + " exceeds one word");
    const Word s = static_cast<Word>(w);
    if ((s & estate::ids_mask) != (before & estate::ids_mask)) throw RuleViolation("rule rewrote edge identifier bits");
    return s;
}
}  // namespace detail

}  // namespace mpcsim
