#include "synth/jsonio.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace synth {

namespace {

using nlohmann::json;

const char* scalar_name(Scalar s) {
  switch (s) {
    case Scalar::Char: return "char";
    case Scalar::Int: return "int";
    case Scalar::Float: return "float";
  }
  return "?";
}

Scalar scalar_of(const std::string& s) {
  if (s == "char") return Scalar::Char;
  if (s == "int") return Scalar::Int;
  if (s == "float") return Scalar::Float;
  throw IoError("unknown scalar kind: " + s);
}

json buffer_to_json(const BufferData& b) {
  json cells = json::array();
  for (const Word& w : b.cells) {
    if (b.elem == Scalar::Float)
      cells.push_back(w.f);
    else
      cells.push_back(w.i);
  }
  return json{{"elem", scalar_name(b.elem)}, {"cells", std::move(cells)}};
}

BufferData buffer_of(const json& j) {
  BufferData b;
  b.elem = scalar_of(j.at("elem").get<std::string>());
  for (const json& c : j.at("cells")) {
    if (b.elem == Scalar::Float)
      b.cells.push_back(word_f(c.get<double>()));
    else
      b.cells.push_back(word_i(c.get<int64_t>()));
  }
  return b;
}

json value_to_json(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Char: return json{{"char", v.scalar.i}};
    case Value::Kind::Int: return json{{"int", v.scalar.i}};
    case Value::Kind::Float: return json{{"float", v.scalar.f}};
    case Value::Kind::Buf:
      return json{{"buf", {{"param", v.buf_param},
                           {"elem", scalar_name(v.elem)},
                           {"len", v.len}}}};
  }
  throw IoError("unserializable value");
}

Value value_of(const json& j) {
  if (j.contains("char")) return Value::of_char(j.at("char").get<int64_t>());
  if (j.contains("int")) return Value::of_int(j.at("int").get<int64_t>());
  if (j.contains("float")) return Value::of_float(j.at("float").get<double>());
  if (j.contains("buf")) {
    const json& b = j.at("buf");
    return Value::of_buf(b.at("param").get<uint32_t>(),
                         scalar_of(b.at("elem").get<std::string>()),
                         b.at("len").get<uint32_t>());
  }
  throw IoError("unrecognized value record: " + j.dump());
}

json bufs_to_json(const std::vector<std::optional<BufferData>>& bufs) {
  json out = json::array();
  for (const auto& b : bufs) {
    if (b)
      out.push_back(buffer_to_json(*b));
    else
      out.push_back(nullptr);
  }
  return out;
}

std::vector<std::optional<BufferData>> bufs_of(const json& j) {
  std::vector<std::optional<BufferData>> out;
  for (const json& b : j) {
    if (b.is_null())
      out.push_back(std::nullopt);
    else
      out.push_back(buffer_of(b));
  }
  return out;
}

json example_to_json(const Example& ex) {
  json inputs = json::array();
  for (const Value& v : ex.inputs) inputs.push_back(value_to_json(v));
  json out{{"inputs", std::move(inputs)},
           {"in_bufs", bufs_to_json(ex.in_bufs)},
           {"out_bufs", bufs_to_json(ex.out_bufs)}};
  out["returned"] = ex.returned ? value_to_json(*ex.returned) : json(nullptr);
  return out;
}

Example example_of(const json& j) {
  Example ex;
  for (const json& v : j.at("inputs")) ex.inputs.push_back(value_of(v));
  ex.in_bufs = bufs_of(j.at("in_bufs"));
  ex.out_bufs = bufs_of(j.at("out_bufs"));
  if (!j.at("returned").is_null()) ex.returned = value_of(j.at("returned"));
  return ex;
}

json sampling_to_json(const SamplingConfig& c) {
  return json{{"int_range", {c.int_range.lo, c.int_range.hi}},
              {"float_range", {c.float_range.lo, c.float_range.hi}},
              {"char_range", {c.char_range.lo, c.char_range.hi}},
              {"buf_len", {c.buf_len.lo, c.buf_len.hi}},
              {"examples", c.examples},
              {"seed", c.seed},
              {"string_mode", c.string_mode},
              {"float_tol", c.float_tol}};
}

SamplingConfig sampling_of(const json& j) {
  SamplingConfig c;
  c.int_range = {j.at("int_range").at(0).get<int64_t>(), j.at("int_range").at(1).get<int64_t>()};
  c.float_range = {j.at("float_range").at(0).get<double>(),
                   j.at("float_range").at(1).get<double>()};
  c.char_range = {j.at("char_range").at(0).get<int64_t>(),
                  j.at("char_range").at(1).get<int64_t>()};
  c.buf_len = {j.at("buf_len").at(0).get<int64_t>(), j.at("buf_len").at(1).get<int64_t>()};
  c.examples = j.at("examples").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.string_mode = j.at("string_mode").get<bool>();
  c.float_tol = j.at("float_tol").get<double>();
  return c;
}

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError(std::string("malformed ") + what + " JSON");
  return j;
}

}  // namespace

std::string spec_to_json(const ProblemSpec& spec) {
  json j{{"signature", spec.sig.render()}, {"sampling", sampling_to_json(spec.cfg)}};
  json exs = json::array();
  for (const Example& ex : spec.examples) exs.push_back(example_to_json(ex));
  j["examples"] = std::move(exs);
  return j.dump(2) + "\n";
}

ProblemSpec spec_from_json(const std::string& text) {
  json j = parse_or_throw(text, "spec");
  try {
    ProblemSpec spec;
    spec.sig = parse_signature(j.at("signature").get<std::string>());
    spec.cfg = sampling_of(j.at("sampling"));
    for (const json& e : j.at("examples")) spec.examples.push_back(example_of(e));
    return spec;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad spec JSON: ") + e.what());
  }
}

std::string models_to_json(const IidModel& iid, const MarkovModel& markov) {
  json forests = json::object();
  for (const auto& [key, forest] : iid.forests) {
    json trees = json::array();
    for (const auto& tree : forest.trees) {
      json nodes = json::array();
      for (const TreeNode& n : tree)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p});
      trees.push_back(std::move(nodes));
    }
    forests[key] = std::move(trees);
  }
  json pairs = json::array();
  for (const auto& [k, count] : markov.w) pairs.push_back({k.first, k.second, count});
  json j{{"iid", {{"theta", iid.theta}, {"forests", std::move(forests)}}},
         {"markov",
          {{"b", markov.b}, {"max_length", markov.max_length}, {"pairs", std::move(pairs)}}}};
  return j.dump(2) + "\n";
}

void models_from_json(const std::string& text, IidModel& iid, MarkovModel& markov) {
  json j = parse_or_throw(text, "model");
  try {
    iid = IidModel{};
    markov = MarkovModel{};
    const json& ji = j.at("iid");
    iid.theta = ji.at("theta").get<double>();
    for (const auto& [key, trees] : ji.at("forests").items()) {
      Forest f;
      for (const json& tree : trees) {
        std::vector<TreeNode> nodes;
        for (const json& n : tree) {
          TreeNode t;
          t.feature = n.at(0).get<int16_t>();
          t.threshold = n.at(1).get<int16_t>();
          t.left = n.at(2).get<uint16_t>();
          t.right = n.at(3).get<uint16_t>();
          t.p = n.at(4).get<float>();
          nodes.push_back(t);
        }
        f.trees.push_back(std::move(nodes));
      }
      iid.forests[key] = std::move(f);
    }
    const json& jm = j.at("markov");
    markov.b = jm.at("b").get<double>();
    markov.max_length = jm.at("max_length").get<int>();
    for (const json& p : jm.at("pairs"))
      markov.w[{p.at(0).get<std::string>(), p.at(1).get<std::string>()}] =
          p.at(2).get<double>();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad model JSON: ") + e.what());
  }
}

std::string report_to_json(const SynthesisReport& rep, const Signature& sig) {
  json j{{"status", to_string(rep.status)},
         {"sequence", print_sequence(rep.sequence, sig)},
         {"candidates", rep.candidates},
         {"sketches", rep.sketches},
         {"wall_time", rep.wall_time},
         {"mem_len", rep.mem_len},
         {"pseudo_c", rep.pseudo_c_text},
         {"ir", rep.ir_text}};
  return j.dump(2) + "\n";
}

SynthesisReport report_from_json(const std::string& text, const Signature& sig) {
  json j = parse_or_throw(text, "report");
  try {
    SynthesisReport rep;
    std::string st = j.at("status").get<std::string>();
    if (st == "solved")
      rep.status = Status::Solved;
    else if (st == "exhausted")
      rep.status = Status::Exhausted;
    else if (st == "timeout")
      rep.status = Status::Timeout;
    else
      throw IoError("unknown report status: " + st);
    std::string seq = j.at("sequence").get<std::string>();
    if (!seq.empty()) rep.sequence = parse_sequence(seq, sig);
    rep.candidates = j.at("candidates").get<long>();
    rep.sketches = j.at("sketches").get<int>();
    rep.wall_time = j.at("wall_time").get<double>();
    rep.mem_len = j.at("mem_len").get<uint32_t>();
    rep.pseudo_c_text = j.at("pseudo_c").get<std::string>();
    rep.ir_text = j.at("ir").get<std::string>();
    return rep;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad report JSON: ") + e.what());
  }
}

std::string corpus_to_text(const TrainingCorpus& corpus) {
  std::string out;
  for (const CorpusRecord& r : corpus) {
    out += r.sig.render();
    out += " ⊢ ";
    out += print_sequence(r.sequence, r.sig);
    out += '\n';
  }
  return out;
}

TrainingCorpus corpus_from_text(const std::string& text) {
  TrainingCorpus corpus;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    size_t sep = line.find("⊢");
    if (sep == std::string::npos)
      throw IoError("corpus line " + std::to_string(line_no) + ": missing ⊢ separator");
    CorpusRecord rec;
    try {
      rec.sig = parse_signature(line.substr(0, sep));
      rec.sequence = parse_sequence(line.substr(sep + std::string("⊢").size()), rec.sig);
    } catch (const std::runtime_error& e) {
      throw IoError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec);
}

}  // namespace synth
