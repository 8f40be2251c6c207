#include "loro/replay.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace loro {

std::string source_tag_name(SourceTag t) {
  switch (t) {
    case SourceTag::LLM: return "llm";
    case SourceTag::Scripted: return "scripted";
    case SourceTag::Random: return "random";
    case SourceTag::OnPolicy: return "onpolicy";
    case SourceTag::Online: return "online";
  }
  return "unknown";
}

SourceTag source_tag_from_name(const std::string& name) {
  if (name == "llm") return SourceTag::LLM;
  if (name == "scripted") return SourceTag::Scripted;
  if (name == "random") return SourceTag::Random;
  if (name == "onpolicy") return SourceTag::OnPolicy;
  if (name == "online") return SourceTag::Online;
  throw std::invalid_argument("unknown source tag: " + name);
}

Dataset dataset_merge(const Dataset& a, const Dataset& b) {
  if (!a.empty() && !b.empty() && a.env_kind != b.env_kind)
    throw std::invalid_argument("dataset_merge: env provenance mismatch");
  Dataset out;
  out.env_kind = a.empty() ? b.env_kind : a.env_kind;
  out.source_tag = a.source_tag;
  out.transitions = a.transitions;
  out.transitions.insert(out.transitions.end(), b.transitions.begin(), b.transitions.end());
  return out;
}

namespace {

std::string join_values(const std::vector<double>& v) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    if (i) s += ',';
    s += buf;
  }
  return s;
}

std::vector<double> split_values(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stod(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

std::string action_to_field(const Action& a) {
  if (const int* idx = std::get_if<int>(&a)) return std::to_string(*idx);
  return join_values(std::get<std::vector<double>>(a));
}

Action action_from_field(const std::string& s, bool discrete) {
  if (discrete) return Action{std::stoi(s)};
  return Action{split_values(s)};
}

Observation obs_from_values(EnvKind kind, std::vector<double> values) {
  Observation o;
  o.values = std::move(values);
  if (kind == EnvKind::FrozenLake || kind == EnvKind::CliffWalking) {
    for (std::size_t i = 0; i < o.values.size(); ++i) {
      if (o.values[i] != 0.0) {
        o.index = static_cast<int>(i);
        o.row = o.index / grid_cols(kind);
        o.col = o.index % grid_cols(kind);
        break;
      }
    }
  }
  return o;
}

}  // namespace

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out << "# source=" << source_tag_name(d.source_tag) << "\n";
  int episode = 0, step = 0;
  for (const Transition& t : d.transitions) {
    out << env_kind_name(d.env_kind) << '\t' << episode << '\t' << step << '\t'
        << join_values(t.obs.values) << '\t' << action_to_field(t.action) << '\t';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", t.reward);
    out << buf << '\t' << join_values(t.next_obs.values) << '\t' << (t.terminated ? 1 : 0) << '\t'
        << (t.truncated ? 1 : 0) << '\n';
    if (t.terminated || t.truncated) {
      ++episode;
      step = 0;
    } else {
      ++step;
    }
  }
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  Dataset d;
  bool first_record = true;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("source=");
      if (eq != std::string::npos) d.source_tag = source_tag_from_name(line.substr(eq + 7));
      continue;
    }
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() != 9) throw std::runtime_error("load_dataset: malformed record in " + path);
    const EnvKind kind = env_kind_from_name(fields[0]);
    if (first_record) {
      d.env_kind = kind;
      first_record = false;
    } else if (kind != d.env_kind) {
      throw std::runtime_error("load_dataset: mixed env provenance in " + path);
    }
    const bool discrete = make_spec(kind).action_space.discrete;
    Transition t;
    t.obs = obs_from_values(kind, split_values(fields[3]));
    t.action = action_from_field(fields[4], discrete);
    t.reward = std::stod(fields[5]);
    t.next_obs = obs_from_values(kind, split_values(fields[6]));
    t.terminated = fields[7] == "1";
    t.truncated = fields[8] == "1";
    t.source = d.source_tag;
    d.transitions.push_back(std::move(t));
  }
  return d;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index");
  if (size_ < capacity_) return storage_[i];
  return storage_[(next_ + i) % capacity_];
}

void ReplayBuffer::sample_indices(std::size_t batch, std::vector<std::size_t>& out) {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  out.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    out[i] = pick(rng_);
    if (required_source_ && at(out[i]).source != *required_source_)
      throw std::logic_error("replay buffer sampled a transition with a forbidden source tag");
  }
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch) {
  std::vector<std::size_t> idx;
  sample_indices(batch, idx);
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i : idx) out.push_back(at(i));
  return out;
}

}  // namespace loro
