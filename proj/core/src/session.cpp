#include "deers/session.hpp"

#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>

namespace deers {

DualState DualState::padded(std::size_t n) {
  DualState s;
  s.positive.assign(n, kPaddingId);
  s.negative.assign(n, kPaddingId);
  return s;
}

DualState Session::initial(std::size_t window) const {
  if (initial_state.has_value()) {
    if (initial_state->window() != window)
      throw ValidationError(fmt::format("session {}: initial state window {} != requested {}",
                                        session_id, initial_state->window(), window));
    return *initial_state;
  }
  return DualState::padded(window);
}

void Session::validate() const {
  if (events.empty())
    throw ValidationError(fmt::format("session {}: no events", session_id));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.time_index != static_cast<std::int64_t>(i) + 1)
      throw ValidationError(fmt::format(
          "session {}: time_index must be gapless from 1, got {} at position {}", session_id,
          e.time_index, i));
    if (e.item == kPaddingId)
      throw ValidationError(
          fmt::format("session {}: padding item id {} in event log", session_id, kPaddingId));
  }
}

namespace {

std::vector<ItemId> shift_append(const std::vector<ItemId>& window, ItemId action) {
  std::vector<ItemId> out;
  out.reserve(window.size());
  out.insert(out.end(), window.begin() + 1, window.end());
  out.push_back(action);
  return out;
}

}  // namespace

DualState transition(const DualState& state, ItemId action, double reward) {
  if (action == kPaddingId) throw ValidationError("transition: action is the padding item");
  if (reward < 0.0)
    throw ValidationError(fmt::format("transition: negative reward {} is undefined", reward));
  DualState next = state;
  if (reward > 0.0)
    next.positive = shift_append(state.positive, action);
  else
    next.negative = shift_append(state.negative, action);
  return next;
}

std::vector<ItemId> transition_basic(const std::vector<ItemId>& window, ItemId action,
                                     double reward) {
  if (action == kPaddingId) throw ValidationError("transition: action is the padding item");
  if (reward < 0.0)
    throw ValidationError(fmt::format("transition: negative reward {} is undefined", reward));
  if (reward == 0.0) return window;
  return shift_append(window, action);
}

namespace {

using nlohmann::json;

SessionEvent parse_event(const json& j, std::int64_t session_id, const std::string& origin,
                         std::size_t line_no) {
  if (!j.is_object() || !j.contains("t") || !j.contains("item") || !j.contains("category") ||
      !j.contains("feedback"))
    throw ValidationError(fmt::format("{}:{}: session {}: malformed event object", origin,
                                      line_no, session_id));
  SessionEvent e;
  e.time_index = j.at("t").get<std::int64_t>();
  e.item = j.at("item").get<ItemId>();
  e.category = j.at("category").get<CategoryId>();
  if (!j.at("feedback").is_string())
    throw ValidationError(
        fmt::format("{}:{}: session {}: feedback must be a string", origin, line_no, session_id));
  e.feedback = feedback_from_string(j.at("feedback").get<std::string>());
  return e;
}

}  // namespace

std::vector<Session> parse_sessions_jsonl(std::istream& in, const std::string& origin) {
  std::vector<Session> sessions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(fmt::format("{}:{}: invalid JSON: {}", origin, line_no, e.what()));
    }
    if (!j.is_object() || !j.contains("session_id") || !j.contains("events"))
      throw ValidationError(
          fmt::format("{}:{}: expected a session object with session_id and events", origin,
                      line_no));
    if (line_no == 1 && j.contains("kind"))
      throw ValidationError(fmt::format(
          "{}: refusing to read '{}' as a session log (looks like a {} file)", origin, origin,
          j.at("kind").get<std::string>()));
    Session s;
    s.session_id = j.at("session_id").get<std::int64_t>();
    for (const auto& je : j.at("events"))
      s.events.push_back(parse_event(je, s.session_id, origin, line_no));
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

std::vector<Session> read_sessions_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open session log '{}'", path));
  return parse_sessions_jsonl(in, path);
}

void write_sessions_jsonl(const std::vector<Session>& sessions, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write session log '{}'", path));
  for (const auto& s : sessions) {
    nlohmann::ordered_json j;
    j["session_id"] = s.session_id;
    auto& events = j["events"] = nlohmann::ordered_json::array();
    for (const auto& e : s.events) {
      nlohmann::ordered_json je;
      je["t"] = e.time_index;
      je["item"] = e.item;
      je["category"] = e.category;
      je["feedback"] = to_string(e.feedback);
      events.push_back(std::move(je));
    }
    out << j.dump() << '\n';
  }
  if (!out) throw ValidationError(fmt::format("short write on session log '{}'", path));
}

}  // namespace deers
