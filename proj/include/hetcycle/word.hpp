#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hetcycle/errors.hpp"
#include "hetcycle/model.hpp"

namespace hetcycle {

class ItineraryWord;
using WordPtr = std::shared_ptr<const ItineraryWord>;

/// Run-length-encoded itinerary tokens. `a` and `b` count whole saddle
/// periods; `Tab`/`Tba` are the full transitions; `Sub` repeats another word.
struct TokenA {
    long count = 1;
};
struct TokenB {
    long count = 1;
};
struct TokenTab {
    double nu = 0.0;
};
struct TokenTba {};
struct TokenSub {
    WordPtr word;
    long count = 1;
};
using Token = std::variant<TokenA, TokenB, TokenTab, TokenTba, TokenSub>;

namespace detail {

enum class LeafKind : uint8_t { a, b, tab, tba };

struct Leaf {
    LeafKind kind;
    long count;  // whole periods for a/b, 1 for transitions
    double nu;   // Tab only
};

inline ChartId leaf_start_chart(LeafKind k) {
    switch (k) {
        case LeafKind::a: return {ChartRole::a_phase, 0};
        case LeafKind::b: return {ChartRole::b_phase, 0};
        case LeafKind::tab: return {ChartRole::ab_step, 0};
        case LeafKind::tba: return {ChartRole::ba_step, 0};
    }
    throw BadWordError("leaf_start_chart: bad leaf");
}

}  // namespace detail

/// A cyclic itinerary. Chart chaining is validated on construction: every
/// token must hand over to a successor whose start chart it can enter, and
/// the final token wraps around to the first.
class ItineraryWord {
  public:
    ItineraryWord(std::vector<Token> tokens, const CycleCentralData& data)
        : tokens_(std::move(tokens)) {
        if (tokens_.empty()) throw BadWordError("ItineraryWord: empty token list");
        flatten(data);
        validate();
    }

    static WordPtr make(std::vector<Token> tokens, const CycleCentralData& data) {
        return std::make_shared<const ItineraryWord>(std::move(tokens), data);
    }

    /// The fixed orbit of the saddle B (resp. A): one full period.
    static WordPtr saddle_b(const CycleCentralData& data) { return make({TokenB{1}}, data); }
    static WordPtr saddle_a(const CycleCentralData& data) { return make({TokenA{1}}, data); }

    const std::vector<Token>& tokens() const { return tokens_; }
    long period() const { return period_; }
    ChartId start_chart() const { return detail::leaf_start_chart(leaves_.front().kind); }

    const std::vector<detail::Leaf>& leaves() const { return leaves_; }

    std::string describe() const {
        std::ostringstream os;
        for (const auto& lf : leaves_) {
            switch (lf.kind) {
                case detail::LeafKind::a: os << "a^" << lf.count << " "; break;
                case detail::LeafKind::b: os << "b^" << lf.count << " "; break;
                case detail::LeafKind::tab: os << "Tab(" << lf.nu << ") "; break;
                case detail::LeafKind::tba: os << "Tba "; break;
            }
        }
        return os.str();
    }

  private:
    void flatten(const CycleCentralData& data) {
        pi_a_ = data.pi_a;
        pi_b_ = data.pi_b;
        t_ab_ = data.t_ab;
        t_ba_ = data.t_ba;
        expand(tokens_);
        if (leaves_.empty()) throw BadWordError("ItineraryWord: no steps");
        // merge adjacent equal-kind a/b runs created by sub-word boundaries
        std::vector<detail::Leaf> merged;
        for (const auto& lf : leaves_) {
            if (!merged.empty() && merged.back().kind == lf.kind &&
                (lf.kind == detail::LeafKind::a || lf.kind == detail::LeafKind::b)) {
                merged.back().count += lf.count;
            } else {
                merged.push_back(lf);
            }
        }
        leaves_ = std::move(merged);
        period_ = 0;
        for (const auto& lf : leaves_) {
            switch (lf.kind) {
                case detail::LeafKind::a: period_ += lf.count * pi_a_; break;
                case detail::LeafKind::b: period_ += lf.count * pi_b_; break;
                case detail::LeafKind::tab: period_ += t_ab_; break;
                case detail::LeafKind::tba: period_ += t_ba_; break;
            }
        }
    }

    void expand(const std::vector<Token>& toks) {
        for (const auto& t : toks) {
            if (const auto* a = std::get_if<TokenA>(&t)) {
                if (a->count < 1) throw BadWordError("ItineraryWord: a-run count must be >= 1");
                leaves_.push_back({detail::LeafKind::a, a->count, 0.0});
            } else if (const auto* b = std::get_if<TokenB>(&t)) {
                if (b->count < 1) throw BadWordError("ItineraryWord: b-run count must be >= 1");
                leaves_.push_back({detail::LeafKind::b, b->count, 0.0});
            } else if (const auto* ab = std::get_if<TokenTab>(&t)) {
                leaves_.push_back({detail::LeafKind::tab, 1, ab->nu});
            } else if (std::get_if<TokenTba>(&t)) {
                leaves_.push_back({detail::LeafKind::tba, 1, 0.0});
            } else if (const auto* sub = std::get_if<TokenSub>(&t)) {
                if (!sub->word || sub->count < 1)
                    throw BadWordError("ItineraryWord: bad sub-word token");
                for (long r = 0; r < sub->count; ++r) expand(sub->word->tokens_);
            }
        }
    }

    void validate() const {
        using detail::LeafKind;
        const size_t n = leaves_.size();
        for (size_t i = 0; i < n; ++i) {
            const LeafKind cur = leaves_[i].kind;
            const LeafKind nxt = leaves_[(i + 1) % n].kind;
            bool ok = false;
            switch (cur) {
                // a->a and b->b only survive merging across the cyclic wrap
                // of a pure saddle word; both are legal phase cycling.
                case LeafKind::a: ok = nxt == LeafKind::tab || nxt == LeafKind::a; break;
                case LeafKind::b: ok = nxt == LeafKind::tba || nxt == LeafKind::b; break;
                case LeafKind::tab: ok = nxt == LeafKind::b || nxt == LeafKind::tba; break;
                case LeafKind::tba: ok = nxt == LeafKind::a || nxt == LeafKind::tab; break;
            }
            if (!ok)
                throw BadWordError("ItineraryWord: token chain breaks at step " +
                                   std::to_string(i) + " (" + describe() + ")");
        }
    }

    std::vector<Token> tokens_;
    std::vector<detail::Leaf> leaves_;
    long period_ = 0;
    int pi_a_ = 1, pi_b_ = 1, t_ab_ = 1, t_ba_ = 1;
};

/// Streams the branch steps of a word in order, wrapping cyclically. State is
/// O(1); each next() is O(1).
class WordCursor {
  public:
    WordCursor(const CycleSystem& system, WordPtr word)
        : sys_(&system), word_(std::move(word)) {
        reset();
    }

    void reset() {
        leaf_ = 0;
        step_in_leaf_ = 0;
        chart_ = word_->start_chart();
    }

    const ChartId& chart() const { return chart_; }
    long period() const { return word_->period(); }

    /// Branch for the current step, then advance.
    BranchMap next() {
        const auto& leaves = word_->leaves();
        const auto& lf = leaves[leaf_];
        const long len = leaf_length(lf);
        const bool last = step_in_leaf_ + 1 == len;
        ChartId target;
        if (!last) {
            target = sys_->default_target(chart_);
            // inside an a/b run the default target cycles the saddle phases
        } else {
            const auto& nxt = leaves[(leaf_ + 1) % leaves.size()];
            target = detail::leaf_start_chart(nxt.kind);
        }
        BranchMap b = sys_->branch(chart_, target, lf.kind == detail::LeafKind::tab ? lf.nu : 0.0);
        chart_ = target;
        if (last) {
            leaf_ = (leaf_ + 1) % leaves.size();
            step_in_leaf_ = 0;
        } else {
            ++step_in_leaf_;
        }
        return b;
    }

  private:
    long leaf_length(const detail::Leaf& lf) const {
        const auto& c = sys_->central();
        switch (lf.kind) {
            case detail::LeafKind::a: return lf.count * c.pi_a;
            case detail::LeafKind::b: return lf.count * c.pi_b;
            case detail::LeafKind::tab: return c.t_ab;
            case detail::LeafKind::tba: return c.t_ba;
        }
        return 0;
    }

    const CycleSystem* sys_;
    WordPtr word_;
    size_t leaf_ = 0;
    long step_in_leaf_ = 0;
    ChartId chart_;
};

}  // namespace hetcycle
