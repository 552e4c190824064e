#pragma once

#define CLDA_VERSION "0.1.0"
