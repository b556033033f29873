// Builds the bundled replay fixture: a 50-instance multihop dataset with
// 2 relevant + 8 distractor documents per instance, a transcript store
// covering every E/G call the default hotpotqa plan issues, and the
// expected report for the self-scoring check. Fully deterministic, so
// reruns reproduce the committed bytes.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "e2g/backend.hpp"
#include "e2g/errors.hpp"
#include "e2g/runner.hpp"
#include "e2g/store.hpp"
#include "e2g/task.hpp"

namespace {

using namespace e2g;

constexpr std::uint32_t kSeed = 24601;

const std::array<const char*, 10> kFirst = {"Alden", "Berta", "Casimir", "Dora", "Elio",
                                            "Freya", "Gustav", "Hilda", "Ivo", "Junia"};
const std::array<const char*, 5> kLast = {"Marek", "Norling", "Ostrava", "Pelle", "Quint"};
const std::array<const char*, 10> kCityA = {"Vel", "Tor", "Mar", "Gal", "Bren",
                                            "Cos", "Dal", "Fen", "Lum", "Sor"};
const std::array<const char*, 5> kCityB = {"mora", "wick", "stad", "burgh", "etta"};
const std::array<const char*, 10> kInstA = {"Harrow", "Keldan", "Mirelle", "Novak", "Orvis",
                                            "Palter", "Quillon", "Rastel", "Sunder", "Tavish"};
const std::array<const char*, 5> kInstB = {"Institute", "Athenaeum", "Archive", "Conservatory",
                                           "Gallery"};
const std::array<const char*, 10> kArtA = {"bronze", "gilded", "carved", "woven", "painted",
                                           "etched", "amber", "ivory", "cobalt", "marble"};
const std::array<const char*, 5> kArtB = {"astrolabe", "triptych", "codex", "tapestry",
                                          "chronometer"};
const std::array<const char*, 5> kProfession = {"cartographer", "botanist", "composer",
                                                "engraver", "archivist"};
const std::array<double, 8> kRecall = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

std::string person(int i) { return std::string(kFirst[i % 10]) + " " + kLast[i / 10]; }
std::string city(int i) { return std::string(kCityA[i % 10]) + kCityB[i / 10]; }
std::string institution(int i) { return std::string(kInstA[i % 10]) + " " + kInstB[i / 10]; }
std::string artifact(int i) { return std::string(kArtA[i % 10]) + " " + kArtB[i / 10]; }
int year(int i) { return 1821 + (i * 37) % 180; }

std::string person_doc(int i) {
  std::string p = person(i);
  return p + " was a " + kProfession[i % 5] + " born in " + city(i) + ". In " +
         std::to_string(year(i)) + ", " + p + " founded the " + institution(i) + ". " + p +
         " spent the later years teaching in " + city(i) + ".";
}

std::string institution_doc(int i) {
  return "The " + institution(i) + " stands in " + city(i) + ". It keeps the " + artifact(i) +
         " in its main hall. Visitors reach it through the old " + city(i) + " arcade.";
}

enum class Kind { correct_wh, correct_yn, flip, span, ungrounded, unlabeled };

struct Completions {
  std::string e;
  std::string g;
  std::string cot;  // single-step transcript for the comparison run
};

struct Built {
  Instance instance;
  Completions completions;
};

// pinned Fisher-Yates; std::shuffle leaves the draw order unspecified
template <typename T>
void shuffle_pinned(std::vector<T>& v, std::mt19937& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng() % i;
    std::swap(v[i - 1], v[j]);
  }
}

Built build_instance(int i, Kind kind, int wh_variant, std::mt19937& rng) {
  Built out;
  Instance& inst = out.instance;
  inst.id = "hp" + std::string(i < 10 ? "00" : "0") + std::to_string(i);
  inst.task = task_kind(TaskName::multihop_qa);

  // two relevant documents land inside the prompted top-5 window
  std::vector<std::string> docs(10);
  std::size_t p1 = rng() % 5;
  std::size_t p2 = (p1 + 1 + rng() % 4) % 5;
  docs[p1] = person_doc(i);
  docs[p2] = institution_doc(i);
  std::size_t slot = 0;
  for (int offset : {3, 7, 11, 17}) {
    int j = (i + offset) % 50;
    for (const std::string& doc : {person_doc(j), institution_doc(j)}) {
      while (slot < docs.size() && !docs[slot].empty()) ++slot;
      docs[slot] = doc;
    }
  }
  inst.context_docs = std::move(docs);

  if (i % 5 != 3) inst.retrieval_recall = kRecall[rng() % kRecall.size()];

  std::string gold;
  std::string key_sentence;
  std::string wrong;
  switch (wh_variant) {
    case 0:
      inst.query = "What does the " + institution(i) + " founded by " + person(i) + " hold?";
      gold = "the " + artifact(i);
      key_sentence = "It keeps the " + artifact(i) + " in its main hall.";
      wrong = "the " + artifact((i + 1) % 50);
      break;
    case 1:
      inst.query = "Where does the " + institution(i) + " stand?";
      gold = city(i);
      key_sentence = "The " + institution(i) + " stands in " + city(i) + ".";
      wrong = city((i + 1) % 50);
      break;
    default:
      inst.query = "Who founded the " + institution(i) + "?";
      gold = person(i);
      key_sentence = "In " + std::to_string(year(i)) + ", " + person(i) + " founded the " +
                     institution(i) + ".";
      wrong = person((i + 1) % 50);
      break;
  }

  const std::string founded_sentence = "In " + std::to_string(year(i)) + ", " + person(i) +
                                       " founded the " + institution(i) + ".";
  const int j = (i + 3) % 50;  // its documents sit in this context as distractors
  Completions& c = out.completions;

  switch (kind) {
    case Kind::correct_wh:
      inst.gold_answers = {gold};
      c.e = "Answer: " + gold + "\nEvidence and explanation: " + key_sentence;
      c.g = "Answer: " + gold + "\nEvidence and explanation: " + key_sentence;
      break;
    case Kind::correct_yn:
      if (i % 2 == 0) {
        inst.query = "Was the " + institution(i) + " founded by " + person(i) + "?";
        inst.gold_answers = {"yes"};
        c.e = "Answer: yes\nEvidence and explanation: " + founded_sentence;
        c.g = "Answer: yes\nEvidence and explanation: Yes, " + founded_sentence;
      } else {
        inst.query = "Was the " + institution(j) + " founded by " + person(i) + "?";
        inst.gold_answers = {"no"};
        c.e = "Answer: no\nEvidence and explanation: No, the " + institution(j) +
              " was founded by " + person(j) + ".";
        c.g = "Answer: no\nEvidence and explanation: The founder was " + person(j) + ", not " +
              person(i) + ".";
      }
      break;
    case Kind::flip:
      if (i % 2 == 0) {
        inst.query = "Was the " + institution(i) + " founded by " + person(i) + "?";
        inst.gold_answers = {"yes"};
        c.e = "Answer: yes\nEvidence and explanation: Yes, " + founded_sentence;
        c.g = "Answer: no\nEvidence and explanation: The record does not settle it.";
      } else {
        inst.query = "Was the " + institution(j) + " founded by " + person(i) + "?";
        inst.gold_answers = {"no"};
        c.e = "Answer: no\nEvidence and explanation: No, the " + institution(j) +
              " was founded by " + person(j) + ".";
        c.g = "Answer: yes\nEvidence and explanation: It seems likely.";
      }
      break;
    case Kind::span:
      inst.gold_answers = {gold};
      c.e = "Answer: " + wrong + "\nEvidence and explanation: " + key_sentence;
      c.g = "Answer: " + wrong + "\nEvidence and explanation: " + key_sentence;
      break;
    case Kind::ungrounded:
      inst.gold_answers = {gold};
      c.e = "Answer: " + wrong + "\nEvidence and explanation: The Halvern registry places " +
            wrong + " inside the Doriath vault. A sealed ledger of the Brask syndicate records "
            "that transfer.";
      c.g = "Answer: " + wrong + "\nEvidence and explanation: The registry entry is unambiguous.";
      break;
    case Kind::unlabeled:
      inst.gold_answers = {gold};
      c.e = gold + "\nThe context states this directly. " + key_sentence;
      c.g = "Answer: " + gold + "\nEvidence and explanation: " + key_sentence;
      break;
  }

  // cot answers wrong wherever the two-step run does, plus a few more
  bool e2g_wrong = kind == Kind::flip || kind == Kind::span || kind == Kind::ungrounded;
  bool cot_wrong = e2g_wrong || (kind == Kind::correct_wh && i % 7 == 0);
  std::string cot_answer;
  if (!cot_wrong) {
    cot_answer = inst.gold_answers.front();
  } else if (kind == Kind::flip || kind == Kind::correct_yn) {
    cot_answer = inst.gold_answers.front() == "yes" ? "no" : "yes";
  } else {
    cot_answer = wrong;
  }
  c.cot = cot_wrong ? "It is hard to tell from the passage. Answer: " + cot_answer
                    : "The passage states it outright. Answer: " + cot_answer;
  return out;
}

// deterministic stand-in for the API: serves the scripted completion for
// each (instance, step) pair while the store records it
class FixtureBackend : public CompletionBackend {
 public:
  explicit FixtureBackend(std::map<std::string, std::string> by_tag)
      : by_tag_(std::move(by_tag)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    auto it = by_tag_.find(request.request_tag);
    if (it == by_tag_.end())
      throw BackendError("no scripted completion for tag '" + request.request_tag + "'");
    CompletionResponse response;
    response.text = it->second;
    response.prompt_tokens = static_cast<std::int64_t>(estimate_tokens(request.prompt));
    response.output_tokens = static_cast<std::int64_t>(estimate_tokens(response.text));
    std::uint32_t h = 2166136261u;
    for (char ch : request.request_tag) h = (h ^ static_cast<unsigned char>(ch)) * 16777619u;
    response.latency_ms = 5 + h % 23;
    response.source = ResponseSource::live;
    return response;
  }

  std::string describe() const override { return "fixture-script"; }

 private:
  std::map<std::string, std::string> by_tag_;
};

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path root = argc > 1 ? argv[1] : "fixtures";

  std::vector<Kind> kinds;
  kinds.insert(kinds.end(), 30, Kind::correct_wh);
  kinds.insert(kinds.end(), 5, Kind::correct_yn);
  kinds.insert(kinds.end(), 4, Kind::flip);
  kinds.insert(kinds.end(), 5, Kind::span);
  kinds.insert(kinds.end(), 4, Kind::ungrounded);
  kinds.insert(kinds.end(), 2, Kind::unlabeled);

  std::mt19937 rng(kSeed);
  shuffle_pinned(kinds, rng);

  Dataset dataset;
  dataset.name = "hotpot50";
  std::map<std::string, std::string> completions_by_tag;
  int wh_counter = 0;
  for (int i = 0; i < 50; ++i) {
    int variant = kinds[i] == Kind::ungrounded ? 0 : wh_counter++ % 3;
    Built built = build_instance(i, kinds[i], variant, rng);
    completions_by_tag[built.instance.id + ":E"] = built.completions.e;
    completions_by_tag[built.instance.id + ":G"] = built.completions.g;
    completions_by_tag[built.instance.id + ":single"] = built.completions.cot;
    dataset.instances.push_back(std::move(built.instance));
  }

  std::filesystem::create_directories(root);
  std::filesystem::path dataset_path = root / "hotpot50.jsonl";
  save_dataset(dataset, dataset_path);

  std::filesystem::path store_root = root / "transcripts";
  std::filesystem::remove_all(store_root);

  RunConfig config;
  config.dataset_path = dataset_path;
  config.schema = "hotpotqa";
  config.backend_mode = "replay";
  config.model_id = "replay";
  config.store_root = store_root;
  config.out_dir = root / "tmp-run";

  try {
    ReplayBackend backend{TranscriptStore(store_root),
                          std::make_shared<FixtureBackend>(completions_by_tag)};
    RunRecord record = execute_run(config, backend);
    std::filesystem::copy_file(record.dir / "report.json", root / "expected_report.json",
                               std::filesystem::copy_options::overwrite_existing);

    RunConfig cot_config = config;
    cot_config.strategy = StrategyName::cot;
    cot_config.two_step = false;
    RunRecord cot_record = execute_run(cot_config, backend);
    std::filesystem::remove_all(config.out_dir);

    TranscriptStore store(store_root);
    std::cout << "wrote " << dataset_path.string() << " (" << dataset.instances.size()
              << " instances)\n";
    std::cout << "wrote " << store.keys().size() << " transcripts under " << store_root.string()
              << "\n";
    std::cout << "wrote " << (root / "expected_report.json").string() << "\n";
    const auto& metrics = record.report.at("metrics");
    const auto& cot_metrics = cot_record.report.at("metrics");
    std::cout << "fixture metrics: e2g-base em " << metrics.at("em").get<double>() << ", f1 "
              << metrics.at("f1").get<double>() << "; cot em "
              << cot_metrics.at("em").get<double>() << ", f1 "
              << cot_metrics.at("f1").get<double>() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fixture generation failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
