// Copyright 2026 The crawldoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include "crawldoc/config.hpp"
#include "crawldoc/corpus.hpp"
#include "crawldoc/docrepr.hpp"
#include "crawldoc/embedder.hpp"
#include "crawldoc/errors.hpp"
#include "crawldoc/eval.hpp"
#include "crawldoc/experiments.hpp"
#include "crawldoc/fetcher.hpp"
#include "crawldoc/html.hpp"
#include "crawldoc/io.hpp"
#include "crawldoc/pdf.hpp"
#include "crawldoc/ranker.hpp"
#include "crawldoc/remote_backend.hpp"
#include "crawldoc/renderer.hpp"
#include "crawldoc/trainer.hpp"
#include "crawldoc/url.hpp"
#include "crawldoc/util.hpp"
