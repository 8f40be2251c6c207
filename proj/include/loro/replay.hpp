#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "loro/env.hpp"

namespace loro {

enum class SourceTag { LLM, Scripted, Random, OnPolicy, Online };

std::string source_tag_name(SourceTag t);
SourceTag source_tag_from_name(const std::string& name);

struct Transition {
  Observation obs;
  Action action;
  double reward = 0.0;
  Observation next_obs;
  bool terminated = false;
  bool truncated = false;
  SourceTag source = SourceTag::Online;
};

// Ordered, unbounded transition store; the warm-start dataset lives here.
struct Dataset {
  EnvKind env_kind = EnvKind::CartPole;
  SourceTag source_tag = SourceTag::Online;
  std::vector<Transition> transitions;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
  void push(Transition t) {
    t.source = source_tag;
    transitions.push_back(std::move(t));
  }
};

// Concatenation a-then-b; throws on env provenance mismatch.
Dataset dataset_merge(const Dataset& a, const Dataset& b);

// Tab-separated on-disk format, one transition per line:
// env_kind, episode, step, obs, action, reward, next_obs, terminated, truncated.
// Episode/step indices are derived from the termination flags on save.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

// Bounded FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(Transition t);
  // `batch` transitions drawn uniformly with replacement. Throws when empty.
  std::vector<Transition> sample(std::size_t batch);
  // Index form used by the agents to avoid copying observations.
  void sample_indices(std::size_t batch, std::vector<std::size_t>& out);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  // i-th oldest entry still stored.
  const Transition& at(std::size_t i) const;

  // When set, every sampled transition must carry this tag (data-hygiene
  // check for the warm-start protocol).
  void require_source(std::optional<SourceTag> tag) { required_source_ = tag; }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t next_ = 0;  // ring write position
  std::size_t size_ = 0;
  std::mt19937_64 rng_;
  std::optional<SourceTag> required_source_;
};

}  // namespace loro
