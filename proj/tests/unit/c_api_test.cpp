// Copyright 2026 The citeprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <string>

#include "citeprint/citeprint.h"
#include "doctest.h"
#include "json.hpp"
#include "support/tempdir.hpp"

namespace {

TEST_SUITE("c_api") {

TEST_CASE("status names and version") {
  CHECK(std::string(cp_status_name(CP_OK)) == "ok");
  CHECK(std::string(cp_status_name(CP_ERR_DATA)) == "data");
  CHECK(std::string(cp_status_name(static_cast<cp_status>(99))) == "unknown");
  CHECK(std::string(cp_version()).size() > 0);
}

TEST_CASE("destroy functions accept NULL") {
  cp_options_destroy(nullptr);
  cp_text_destroy(nullptr);
  cp_model_close(nullptr);
  cp_prediction_destroy(nullptr);
  CHECK(cp_text_size(nullptr) == 0);
}

TEST_CASE("unknown option keys are rejected") {
  cp_options *o = nullptr;
  REQUIRE(cp_options_create(&o) == CP_OK);
  cp_options_set(o, "out", "/tmp/unused");
  cp_options_set(o, "colour", "blue");
  cp_text *summary = reinterpret_cast<cp_text *>(1);
  CHECK(cp_run_synth(o, &summary) == CP_ERR_USAGE);
  CHECK(summary == nullptr);
  CHECK(std::string(cp_last_error()).find("colour") != std::string::npos);
  cp_options_destroy(o);

  REQUIRE(cp_options_create(&o) == CP_OK);
  CHECK(cp_run_build(o, &summary) == CP_ERR_USAGE);
  CHECK(std::string(cp_last_error()).find("corpus") != std::string::npos);
  cp_options_destroy(o);
}

TEST_CASE("synth through the C API") {
  citeprint::testing::TempDir dir;
  cp_options *o = nullptr;
  REQUIRE(cp_options_create(&o) == CP_OK);
  cp_options_set(o, "out", (dir / "corpus").c_str());
  cp_options_set(o, "authors", "2");
  cp_options_set(o, "papers_per_author", "3");
  cp_options_set(o, "seed", "9");
  cp_text *summary = nullptr;
  REQUIRE(cp_run_synth(o, &summary) == CP_OK);
  auto j = nlohmann::json::parse(cp_text_data(summary));
  CHECK(j.at("candidates").size() == 2);
  CHECK(cp_text_size(summary) == std::string(cp_text_data(summary)).size());
  cp_text_destroy(summary);
  cp_options_destroy(o);
}

TEST_CASE("opening a missing checkpoint fails with an error code") {
  cp_model *m = reinterpret_cast<cp_model *>(1);
  cp_status s = cp_model_open("/nonexistent/model.ckpt", nullptr, &m);
  CHECK(s != CP_OK);
  CHECK(m == nullptr);
  CHECK(std::string(cp_last_error()).size() > 0);
}

}  // TEST_SUITE

}  // namespace
