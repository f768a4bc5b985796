#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deers/types.hpp"

namespace deers {

struct SessionEvent {
  std::int64_t time_index = 0;  // 1-based, gapless within a session
  ItemId item = kPaddingId;
  CategoryId category = 0;
  Feedback feedback = Feedback::kSkip;

  bool positive() const { return feedback != Feedback::kSkip; }
};

// The pair (s+, s-): the N most recently clicked/ordered items and the N most
// recently skipped ones, each in chronological order and front-padded with
// kPaddingId while the history is short.
struct DualState {
  std::vector<ItemId> positive;
  std::vector<ItemId> negative;

  static DualState padded(std::size_t n);
  std::size_t window() const { return positive.size(); }

  bool operator==(const DualState&) const = default;
};

struct Session {
  std::int64_t session_id = 0;
  std::vector<SessionEvent> events;
  // State carried over from the user's earlier sessions. Not part of the log
  // format; absent means an all-padding state of the consumer's window size.
  std::optional<DualState> initial_state;

  DualState initial(std::size_t window) const;
  void validate() const;
};

// Dual-window rule: r > 0 shifts the positive window and appends the action,
// r == 0 does the same on the negative window. The other window is untouched.
DualState transition(const DualState& state, ItemId action, double reward);

// Positive-only rule used by the deers-p baseline: a skip leaves the window
// unchanged, a click/order shift-appends.
std::vector<ItemId> transition_basic(const std::vector<ItemId>& window, ItemId action,
                                     double reward);

// Session log dialect: one JSON object per line,
//   {"session_id": int, "events": [{"t": int, "item": int, "category": int,
//    "feedback": "skip"|"click"|"order"}]}
std::vector<Session> parse_sessions_jsonl(std::istream& in, const std::string& origin);
std::vector<Session> read_sessions_jsonl(const std::string& path);
void write_sessions_jsonl(const std::vector<Session>& sessions, const std::string& path);

}  // namespace deers
