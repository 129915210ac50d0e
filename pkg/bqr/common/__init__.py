"""ALD, 난수 생성, Gibbs sampler, 이상치 진단, 시뮬레이션 스터디"""
