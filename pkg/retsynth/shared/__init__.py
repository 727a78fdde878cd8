"""helpers shared by two or more retsynth packages"""
