#pragma once

#define FCMPC_VERSION_STRING "1.0.0"
