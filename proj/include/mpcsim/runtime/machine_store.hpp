#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "mpcsim/core/types.hpp"

namespace mpcsim {

// A typed block of machine memory that reports its size under the word tariff.
class Segment {
  public:
    virtual ~Segment() = default;
    [[nodiscard]] virtual std::size_t words() const = 0;
};

struct WordSegment final : Segment {
    std::vector<Word> data;
    [[nodiscard]] std::size_t words() const override { return data.size(); }
};

struct EdgeSegment final : Segment {
    std::vector<Edge> edges;
    [[nodiscard]] std::size_t words() const override { return 2 * edges.size(); }
};

using SlotId = std::uint32_t;

class MachineStore {
  public:
    template <class T>
    T& get(SlotId slot) {
        if (auto* p = find<T>(slot)) return *p;
        segments_.emplace_back(slot, std::make_unique<T>());
        return static_cast<T&>(*segments_.back().second);
    }

    template <class T>
    T* find(SlotId slot) {
        for (auto& [s, p] : segments_)
            if (s == slot) return static_cast<T*>(p.get());
        return nullptr;
    }

    template <class T>
    const T* find(SlotId slot) const {
        for (const auto& [s, p] : segments_)
            if (s == slot) return static_cast<const T*>(p.get());
        return nullptr;
    }

    void erase(SlotId slot) {
        std::erase_if(segments_, [slot](const auto& e) { return e.first == slot; });
    }

    // "slot=words" for every segment, for fault messages.
    [[nodiscard]] std::string breakdown() const {
        std::string out;
        for (const auto& [s, p] : segments_) out += (out.empty() ? "slots " : ", ") + std::to_string(s) + "=" + std::to_string(p->words());
        return out;
    }

    [[nodiscard]] std::size_t words() const {
        std::size_t w = 0;
        for (const auto& [s, p] : segments_) w += p->words();
        return w;
    }

  private:
    std::vector<std::pair<SlotId, std::unique_ptr<Segment>>> segments_;
};

class Inbox {
  public:
    struct Message {
        MachineId from;
        std::span<const Word> words;
    };

    [[nodiscard]] std::size_t size() const { return from_.size(); }
    [[nodiscard]] bool empty() const { return from_.empty(); }
    [[nodiscard]] std::size_t words() const { return data_.size(); }

    [[nodiscard]] Message operator[](std::size_t i) const {
        return {from_[i], {data_.data() + offs_[i], data_.data() + offs_[i + 1]}};
    }

    class iterator {
      public:
        iterator(const Inbox* box, std::size_t i) : box_(box), i_(i) {}
        Message operator*() const { return (*box_)[i_]; }
        iterator& operator++() {
            ++i_;
            return *this;
        }
        bool operator!=(const iterator& o) const { return i_ != o.i_; }

      private:
        const Inbox* box_;
        std::size_t i_;
    };
    [[nodiscard]] iterator begin() const { return {this, 0}; }
    [[nodiscard]] iterator end() const { return {this, size()}; }

    void clear() {
        data_.clear();
        offs_.assign(1, 0);
        from_.clear();
    }

  private:
    friend class Cluster;
    std::vector<Word> data_;
    std::vector<std::uint32_t> offs_{0};
    std::vector<MachineId> from_;
};

class Outbox {
  public:
    void send(MachineId to, std::span<const Word> payload) {
        data_.insert(data_.end(), payload.begin(), payload.end());
        offs_.push_back(static_cast<std::uint32_t>(data_.size()));
        to_.push_back(to);
    }
    void send(MachineId to, std::initializer_list<Word> payload) {
        send(to, std::span<const Word>(payload.begin(), payload.size()));
    }

    [[nodiscard]] std::size_t words() const { return data_.size(); }
    [[nodiscard]] std::size_t size() const { return to_.size(); }

    void clear() {
        data_.clear();
        offs_.assign(1, 0);
        to_.clear();
    }

  private:
    friend class Cluster;
    std::vector<Word> data_;
    std::vector<std::uint32_t> offs_{0};
    std::vector<MachineId> to_;
};

// Batches small records per destination into one message each.
class Batcher {
  public:
    void put(MachineId to, std::span<const Word> w) {
        recs_.push_back({to, static_cast<std::uint32_t>(data_.size()), static_cast<std::uint32_t>(w.size())});
        data_.insert(data_.end(), w.begin(), w.end());
    }
    void put(MachineId to, std::initializer_list<Word> w) { put(to, std::span<const Word>(w.begin(), w.size())); }

    void flush(Outbox& out) {
        std::stable_sort(recs_.begin(), recs_.end(), [](const Rec& a, const Rec& b) { return a.to < b.to; });
        std::size_t i = 0;
        while (i < recs_.size()) {
            tmp_.clear();
            const MachineId to = recs_[i].to;
            for (; i < recs_.size() && recs_[i].to == to; ++i)
                tmp_.insert(tmp_.end(), data_.begin() + recs_[i].off, data_.begin() + recs_[i].off + recs_[i].len);
            out.send(to, tmp_);
        }
        recs_.clear();
        data_.clear();
    }

  private:
    struct Rec {
        MachineId to;
        std::uint32_t off;
        std::uint32_t len;
    };
    std::vector<Rec> recs_;
    std::vector<Word> data_;
    std::vector<Word> tmp_;
};

}  // namespace mpcsim
