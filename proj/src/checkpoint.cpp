#include "amod/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "amod/baselines.hpp"

namespace amod {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.write(buf, sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void matrix(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(m(i, j));
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = get<double>();
    return m;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("checkpoint truncated");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

std::uint16_t kind_code(const std::string& kind) {
  if (kind == "gnn") return 0;
  if (kind == "mlp") return 1;
  throw std::invalid_argument("unknown model kind " + kind);
}

}  // namespace

Checkpoint snapshot(ActorCritic& model, std::uint64_t episodes_completed) {
  Checkpoint c;
  c.kind = model.kind();
  c.episodes_completed = episodes_completed;
  for (const ad::Parameter* p : model.parameters()) {
    c.tensors.push_back({p->name(), p->value(), p->first_moment, p->second_moment, p->step});
  }
  return c;
}

void restore(ActorCritic& model, const Checkpoint& ckpt) {
  if (ckpt.kind != model.kind()) {
    throw ShapeError("checkpoint holds a " + ckpt.kind + " model, target is " + model.kind());
  }
  const auto params = model.parameters();
  if (params.size() != ckpt.tensors.size()) throw ShapeError("checkpoint parameter count differs from model");
  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Parameter& p = *params[k];
    const CheckpointTensor& t = ckpt.tensors[k];
    if (t.name != p.name()) throw ShapeError("checkpoint parameter " + t.name + " where " + p.name() + " expected");
    if (t.value.rows() != p.value().rows() || t.value.cols() != p.value().cols()) {
      throw ShapeError("checkpoint parameter " + t.name + " has shape " + std::to_string(t.value.rows()) + "x" +
                       std::to_string(t.value.cols()) + ", model expects " + std::to_string(p.value().rows()) +
                       "x" + std::to_string(p.value().cols()));
    }
    p.mutable_value() = t.value;
    p.first_moment = t.first_moment;
    p.second_moment = t.second_moment;
    p.step = t.step;
    p.zero_grad();
  }
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put<std::uint16_t>(kind_code(ckpt.kind));
  w.put<std::uint64_t>(ckpt.episodes_completed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.value.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.value.cols()));
  }
  for (const auto& t : ckpt.tensors) w.matrix(t.value);
  for (const auto& t : ckpt.tensors) {
    w.put<std::int64_t>(t.step);
    w.matrix(t.first_moment);
    w.matrix(t.second_moment);
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + tmp.string() + " for writing");
    const std::string data = w.str();
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::ios_base::failure("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_checkpoint(ActorCritic& model, const std::filesystem::path& path, std::uint64_t episodes_completed) {
  write_checkpoint(snapshot(model, episodes_completed), path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Reader r(buf.str());

  if (r.bytes(4) != std::string(kCheckpointMagic, 4)) throw FormatError("not a checkpoint (bad magic)");
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  const auto kind = r.get<std::uint16_t>();
  if (kind > 1) throw FormatError("unknown model kind code " + std::to_string(kind));
  c.kind = kind == 0 ? "gnn" : "mlp";
  c.episodes_completed = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    CheckpointTensor t;
    const auto len = r.get<std::uint16_t>();
    t.name = r.bytes(len);
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    t.value.resize(rows, cols);
    c.tensors.push_back(std::move(t));
  }
  for (auto& t : c.tensors) t.value = r.matrix(t.value.rows(), t.value.cols());
  for (auto& t : c.tensors) {
    t.step = r.get<std::int64_t>();
    t.first_moment = r.matrix(t.value.rows(), t.value.cols());
    t.second_moment = r.matrix(t.value.rows(), t.value.cols());
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint payload");
  return c;
}

std::shared_ptr<ActorCritic> load_checkpoint(const std::filesystem::path& path, std::uint64_t* episodes_completed) {
  const Checkpoint c = read_checkpoint(path);
  auto find = [&](const std::string& name) -> const CheckpointTensor& {
    for (const auto& t : c.tensors)
      if (t.name == name) return t;
    throw FormatError("checkpoint lacks parameter " + name);
  };
  std::shared_ptr<ActorCritic> model;
  if (c.kind == "gnn") {
    model = std::make_shared<GnnActorCritic>(static_cast<int>(find("actor.gcn.weight").value.rows()), 0);
  } else {
    const auto n = static_cast<int>(find("actor.head.weight").value.cols());
    const auto in = static_cast<int>(find("actor.fc1.weight").value.rows());
    if (n < 1 || in % n != 0) throw FormatError("inconsistent MLP checkpoint shapes");
    model = std::make_shared<MlpActorCritic>(n, in / n, 0);
  }
  restore(*model, c);
  if (episodes_completed != nullptr) *episodes_completed = c.episodes_completed;
  return model;
}

}  // namespace amod
