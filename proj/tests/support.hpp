#pragma once

#include <bap/corpus.hpp>
#include <bap/world.hpp>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace bap::test {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("bap-test-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline Action random_action(std::mt19937_64& rng, int lo = -100, int hi = 100) {
  std::uniform_int_distribution<int> coord(lo, hi);
  std::uniform_int_distribution<int> col(0, static_cast<int>(kColorCount) - 1);
  Action a;
  a.kind = rng() & 1 ? ActionKind::place : ActionKind::pick;
  a.color = kAllColors[static_cast<std::size_t>(col(rng))];
  a.x = coord(rng);
  a.y = coord(rng);
  a.z = coord(rng);
  return a;
}

// A sequence that replays without violations from an empty world. Picks are
// biased toward recently placed cells so cancelling pairs are common.
inline std::vector<Action> random_valid_sequence(std::mt19937_64& rng, const GridSpec& spec, std::size_t len) {
  WorldState w(spec);
  std::vector<Action> out;
  std::uniform_int_distribution<int> xs(spec.x.min, spec.x.max), ys(spec.y.min, spec.y.max), zs(spec.z.min, spec.z.max);
  std::uniform_int_distribution<int> col(0, static_cast<int>(kColorCount) - 1);
  while (out.size() < len) {
    Action a;
    bool do_pick = w.occupied_count() > 0 && (rng() % 3 == 0);
    if (do_pick) {
      const auto& occ = w.occupancy();
      auto it = occ.begin();
      if (!out.empty() && out.back().kind == ActionKind::place && rng() % 2 == 0) {
        it = occ.find(out.back().cell());
      } else {
        std::advance(it, static_cast<long>(rng() % occ.size()));
      }
      a = pick(it->second, it->first.x, it->first.y, it->first.z);
    } else {
      a = place(kAllColors[static_cast<std::size_t>(col(rng))], xs(rng), ys(rng), zs(rng));
    }
    if (w.check(a)) continue;
    w.apply_unchecked(a);
    out.push_back(a);
  }
  return out;
}

inline Event say(const std::string& text, Speaker s = Speaker::architect) { return Event::utterance(s, text); }
inline Event act(const Action& a) { return Event::builder_action(a); }

inline DialogueGame make_game(std::string id, std::string split, std::vector<Event> events) {
  DialogueGame g;
  g.game_id = std::move(id);
  g.split = std::move(split);
  g.events = std::move(events);
  return g;
}

}  // namespace bap::test
